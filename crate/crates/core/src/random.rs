//! Seeded generators for property tests and sweeps. Every generator takes a
//! `ChaCha8Rng`, so a seed reproduces the same object on every platform.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::formula::{Formula, Literal};
use crate::game::{Arena, Player};
use crate::kripke::KripkeStructure;
use crate::tableau::LabelGraph;
use crate::twb::{TreeWithBackEdges, TwbKind, TwbNode};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A closed, guarded formula over `props` with at most `depth` nested
/// connectives. Variables occur only under a modality inside their binder.
pub fn random_formula(r: &mut ChaCha8Rng, depth: usize, props: &[&str]) -> Formula {
    let mut fresh = 0;
    gen_formula(r, depth, props, &[], &[], &mut fresh)
}

fn gen_formula(
    r: &mut ChaCha8Rng,
    depth: usize,
    props: &[&str],
    guarded: &[String],
    pending: &[String],
    fresh: &mut usize,
) -> Formula {
    let p = *props.choose(r).expect("at least one proposition");
    if depth == 0 {
        return match r.gen_range(0..4) {
            0 if !guarded.is_empty() => Formula::var(guarded.choose(r).expect("nonempty")),
            0 | 1 => Formula::prop(p),
            2 => Formula::neg(p),
            _ => {
                if r.gen_bool(0.5) {
                    Formula::Top
                } else {
                    Formula::prop(p)
                }
            }
        };
    }
    match r.gen_range(0..6) {
        0 => Formula::and(
            gen_formula(r, depth - 1, props, guarded, pending, fresh),
            gen_formula(r, depth - 1, props, guarded, pending, fresh),
        ),
        1 => Formula::or(
            gen_formula(r, depth - 1, props, guarded, pending, fresh),
            gen_formula(r, depth - 1, props, guarded, pending, fresh),
        ),
        2 | 3 => {
            let all: Vec<String> = guarded.iter().chain(pending).cloned().collect();
            let k = r.gen_range(1..=2);
            let members: Vec<Formula> = (0..k).map(|_| gen_formula(r, depth - 1, props, &all, &[], fresh)).collect();
            let lit = if r.gen_bool(0.5) { Formula::prop(p) } else { Formula::neg(p) };
            Formula::and(lit, Formula::modal(members))
        }
        _ => {
            let x = format!("X{fresh}");
            *fresh += 1;
            let mut pend = pending.to_vec();
            pend.push(x.clone());
            let body = gen_formula(r, depth - 1, props, guarded, &pend, fresh);
            if r.gen_bool(0.5) {
                Formula::mu(&x, body)
            } else {
                Formula::nu(&x, body)
            }
        }
    }
}

/// A structure with `1..=max_states` states, each with up to three
/// successors (possibly none) and a random subset of `props`.
pub fn random_structure(r: &mut ChaCha8Rng, max_states: usize, props: &[&str]) -> KripkeStructure {
    let n = r.gen_range(1..=max_states);
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut succ = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let k = r.gen_range(0..=3.min(n));
        let mut s: Vec<usize> = (0..n).collect();
        s.shuffle(r);
        s.truncate(k);
        s.sort_unstable();
        succ.push(s);
        labels.push(props.iter().filter(|_| r.gen_bool(0.5)).map(|p| p.to_string()).collect::<BTreeSet<_>>());
    }
    KripkeStructure { names, init: 0, succ, props: labels }
}

/// An arena with `1..=max_positions` positions and priorities below
/// `priorities`. About one position in ten is a dead end.
pub fn random_arena(r: &mut ChaCha8Rng, max_positions: usize, priorities: u32) -> Arena {
    let n = r.gen_range(1..=max_positions);
    let mut a = Arena::default();
    for i in 0..n {
        let owner = if r.gen_bool(0.5) { Player::Even } else { Player::Odd };
        a.add(owner, r.gen_range(0..priorities), format!("v{i}"));
    }
    for v in 0..n {
        if r.gen_bool(0.1) {
            continue;
        }
        for _ in 0..r.gen_range(1..=3) {
            a.add_move(v, r.gen_range(0..n));
        }
    }
    a
}

/// A lasso `(u, v)` of `g` in the form taken by `lasso_has_mu_trace`, from a
/// random walk at the root. `None` when every walk tried hits a dead end.
pub fn random_lasso(r: &mut ChaCha8Rng, g: &LabelGraph) -> Option<(Vec<usize>, Vec<usize>)> {
    for _ in 0..50 {
        let min_len = r.gen_range(1..=12);
        let mut walk = vec![g.root];
        let mut first: HashMap<usize, Vec<usize>> = HashMap::from([(g.root, vec![0])]);
        loop {
            let at = *walk.last().expect("nonempty");
            let kids = &g.nodes[at].children;
            if kids.is_empty() || walk.len() > 400 {
                break;
            }
            let next = kids.choose(r).expect("nonempty").target;
            if walk.len() >= min_len {
                if let Some(prev) = first.get(&next) {
                    let i = *prev.choose(r).expect("nonempty");
                    return Some((walk[..i].to_vec(), walk[i..].to_vec()));
                }
            }
            first.entry(next).or_default().push(walk.len());
            walk.push(next);
        }
    }
    None
}

/// A random tree with back edges of at most `max_nodes` nodes and
/// priorities in `0..=max_priority`. Node priorities are arbitrary, so the
/// parity of each cycle is whatever its top priority says.
pub fn random_twb(r: &mut ChaCha8Rng, max_nodes: usize, max_priority: u32) -> TreeWithBackEdges {
    let lits = ["a", "b", "c"];
    let mut nodes: Vec<TwbNode> = Vec::new();
    // (node, ancestors that may be jumped to)
    let mut open: Vec<(usize, Vec<usize>)> = Vec::new();
    nodes.push(TwbNode::modal(BTreeSet::new(), Vec::new()).with_priority(r.gen_range(0..=max_priority)));
    open.push((0, vec![0]));
    while let Some((v, anc)) = open.pop() {
        let arity = match nodes[v].kind {
            TwbKind::Choice => 2,
            _ => r.gen_range(1..=2),
        };
        for _ in 0..arity {
            let id = nodes.len();
            let room = nodes.len() + open.len() + 2 < max_nodes;
            let node = match r.gen_range(0..5) {
                0 | 1 if room => {
                    let lit: BTreeSet<Literal> = [Literal::Pos(lits.choose(r).expect("nonempty").to_string())].into();
                    TwbNode::modal(lit, Vec::new())
                }
                2 if room => TwbNode::choice(Vec::new()),
                3 if !room && r.gen_bool(0.2) => TwbNode::leaf(BTreeSet::new()),
                _ => TwbNode::jump(*anc.choose(r).expect("nonempty")),
            };
            let node = if node.kind == TwbKind::Jump { node } else { node.with_priority(r.gen_range(0..=max_priority)) };
            let grows = matches!(node.kind, TwbKind::Modal | TwbKind::Choice);
            nodes.push(node);
            nodes[v].children.push(id);
            if grows {
                let mut a = anc.clone();
                a.push(id);
                open.push((id, a));
            }
        }
    }
    TreeWithBackEdges { nodes, root: 0 }
}

/// Copies the subtree under `top` into fresh, still unattached nodes. Back
/// edges into the subtree follow the copy; others keep their targets.
fn copy_subtree(t: &mut TreeWithBackEdges, top: usize) -> usize {
    let mut order = Vec::new();
    let mut stack = vec![top];
    while let Some(v) = stack.pop() {
        order.push(v);
        stack.extend(t.nodes[v].children.iter().copied());
    }
    let base = t.nodes.len();
    let map: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, base + i)).collect();
    for &v in &order {
        let mut n = t.nodes[v].clone();
        n.children = n.children.iter().map(|c| map[c]).collect();
        n.back = n.back.map(|b| *map.get(&b).unwrap_or(&b));
        t.nodes.push(n);
    }
    map[&top]
}

/// A bisimilar variant of `t`: some back edges are unrolled once and some
/// subtrees under choice nodes are duplicated. Kinds, literals and
/// priorities are copied, so every path keeps its priority sequence.
pub fn bisimilar_variant(r: &mut ChaCha8Rng, t: &TreeWithBackEdges, steps: usize, max_nodes: usize) -> TreeWithBackEdges {
    let mut out = t.clone();
    for _ in 0..steps {
        if out.len() >= max_nodes {
            break;
        }
        let parents = out.parents();
        if r.gen_bool(0.6) {
            let jumps: Vec<usize> = (0..out.len()).filter(|&v| out.nodes[v].back.is_some()).collect();
            let Some(&j) = jumps.choose(r) else { continue };
            let target = out.nodes[j].back.expect("jump");
            let size = subtree_size(&out, target);
            if out.len() + size > max_nodes {
                continue;
            }
            let copy = copy_subtree(&mut out, target);
            // The copy replaces the jump under its parent.
            let p = parents[j].expect("jumps are never the root");
            for c in &mut out.nodes[p].children {
                if *c == j {
                    *c = copy;
                }
            }
            out = prune(&out);
        } else {
            let choices: Vec<usize> = (0..out.len())
                .filter(|&v| out.nodes[v].kind == TwbKind::Choice && !out.nodes[v].children.is_empty())
                .collect();
            let Some(&v) = choices.choose(r) else { continue };
            let c = *out.nodes[v].children.choose(r).expect("nonempty");
            if out.len() + subtree_size(&out, c) > max_nodes {
                continue;
            }
            let copy = copy_subtree(&mut out, c);
            out.nodes[v].children.push(copy);
        }
    }
    out
}

fn subtree_size(t: &TreeWithBackEdges, top: usize) -> usize {
    let mut n = 0;
    let mut stack = vec![top];
    while let Some(v) = stack.pop() {
        n += 1;
        stack.extend(t.nodes[v].children.iter().copied());
    }
    n
}

/// Drops nodes no longer reachable by tree edges and renumbers the rest.
fn prune(t: &TreeWithBackEdges) -> TreeWithBackEdges {
    let mut keep = Vec::new();
    let mut stack = vec![t.root];
    while let Some(v) = stack.pop() {
        keep.push(v);
        stack.extend(t.nodes[v].children.iter().rev().copied());
    }
    let id: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let nodes = keep
        .iter()
        .map(|&v| {
            let mut n = t.nodes[v].clone();
            n.children = n.children.iter().map(|c| id[c]).collect();
            n.back = n.back.map(|b| id[&b]);
            n
        })
        .collect();
    TreeWithBackEdges { nodes, root: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::validate;
    use crate::tableau::build_label_graph;

    #[test]
    fn generated_formulas_are_well_formed() {
        let mut r = rng(7);
        for _ in 0..200 {
            let f = random_formula(&mut r, 4, &["p", "q"]);
            assert!(validate(&f).is_empty(), "{f}");
        }
    }

    #[test]
    fn trees_and_variants_validate() {
        let mut r = rng(11);
        for _ in 0..100 {
            let t = random_twb(&mut r, 12, 4);
            t.validate().unwrap();
            let v = bisimilar_variant(&mut r, &t, 4, 60);
            v.validate().unwrap();
        }
    }

    #[test]
    fn lassos_close() {
        let g = build_label_graph(&crate::corpus::gen_alpha()).unwrap();
        let mut r = rng(3);
        let (u, v) = random_lasso(&mut r, &g).unwrap();
        let last = *v.last().unwrap();
        assert!(g.edge(last, v[0]).is_some());
        assert!(u.first().map_or(v[0] == g.root, |&x| x == g.root));
    }
}
