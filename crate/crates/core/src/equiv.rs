//! Tableau equivalence of two cores: a structural bisimulation that also
//! agrees on the parity of every infinite path.
//!
//! Parity agreement is checked on the product of bisimilar pairs. Rather than
//! listing lassos one at a time, a breadth-first search runs over states
//! `(product node, left matrix, right matrix)`; states with equal matrices
//! describe lassos of equal parity, so duplicates are dropped. When the search
//! runs dry before the length bound, every lasso has been covered.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::core_graph::{CoreGraph, CoreKind};
use crate::error::Result;
use crate::formula::{Formula, Literal};
use crate::par::Exec;
use crate::tableau::build_label_graph;
use crate::trace::TraceMatrix;

pub const BOUND_ENV: &str = "MUFORGE_LASSO_BOUND";

/// A lasso in the product, as pairs of core node ids. The stem starts at the
/// pair of roots; the cycle returns to its first pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductLasso {
    pub stem: Vec<(usize, usize)>,
    pub cycle: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Counterexample {
    NotBisimilar { detail: String },
    ParityMismatch { lasso: ProductLasso, left_odd: bool, right_odd: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// `exhaustive` is true when no lasso longer than `bound` could change
    /// the answer.
    Equivalent { bound: usize, exhaustive: bool },
    Inequivalent(Counterexample),
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent { .. })
    }
}

type Sig = (CoreKind, BTreeSet<Literal>);

/// Coarsest bisimulation on the disjoint union; returns the block of every
/// node of each side.
fn bisimulation(c1: &CoreGraph, c2: &CoreGraph) -> (Vec<usize>, Vec<usize>) {
    let nodes: Vec<(&CoreGraph, usize)> =
        (0..c1.len()).map(|i| (c1, i)).chain((0..c2.len()).map(|i| (c2, i))).collect();
    let offset = |g: &CoreGraph| if std::ptr::eq(g, c1) { 0 } else { c1.len() };
    let mut init: BTreeMap<Sig, usize> = BTreeMap::new();
    let mut block: Vec<usize> = nodes
        .iter()
        .map(|(g, i)| {
            let n = &g.nodes[*i];
            let next = init.len();
            *init.entry((n.kind, n.literals.clone())).or_insert(next)
        })
        .collect();
    loop {
        let mut sigs: BTreeMap<(usize, BTreeSet<usize>), usize> = BTreeMap::new();
        let next: Vec<usize> = nodes
            .iter()
            .enumerate()
            .map(|(k, (g, i))| {
                let succ: BTreeSet<usize> = g.nodes[*i].edges.iter().map(|e| block[offset(g) + e.target]).collect();
                let fresh = sigs.len();
                *sigs.entry((block[k], succ)).or_insert(fresh)
            })
            .collect();
        let stable = sigs.len() == block.iter().collect::<BTreeSet<_>>().len();
        block = next;
        if stable {
            break;
        }
    }
    let (left, right) = block.split_at(c1.len());
    (left.to_vec(), right.to_vec())
}

fn describe(c: &CoreGraph, n: usize) -> String {
    let node = &c.nodes[n];
    let lits: Vec<String> = node.literals.iter().map(|l| l.to_string()).collect();
    format!("{:?} node with {} successors and literals {{{}}}", node.kind, node.edges.len(), lits.join(","))
}

struct Product {
    pairs: Vec<(usize, usize)>,
    /// Per pair: (target pair, left edge, right edge).
    edges: Vec<Vec<(usize, usize, usize)>>,
}

fn product(c1: &CoreGraph, c2: &CoreGraph, b1: &[usize], b2: &[usize]) -> Product {
    let mut ids: HashMap<(usize, usize), usize> = HashMap::from([((c1.root, c2.root), 0)]);
    let mut pairs = vec![(c1.root, c2.root)];
    let mut edges = Vec::new();
    let mut k = 0;
    while k < pairs.len() {
        let (x, y) = pairs[k];
        let mut out = Vec::new();
        for (i, e1) in c1.nodes[x].edges.iter().enumerate() {
            for (j, e2) in c2.nodes[y].edges.iter().enumerate() {
                if b1[e1.target] != b2[e2.target] {
                    continue;
                }
                let key = (e1.target, e2.target);
                let t = *ids.entry(key).or_insert_with(|| {
                    pairs.push(key);
                    pairs.len() - 1
                });
                out.push((t, i, j));
            }
        }
        edges.push(out);
        k += 1;
    }
    Product { pairs, edges }
}

/// Lasso-length bound used when none is given: the environment override, or
/// product size times the number of priorities on each side.
pub fn default_bound(product_nodes: usize, max1: u32, max2: u32) -> usize {
    if let Some(b) = std::env::var(BOUND_ENV).ok().and_then(|v| v.parse().ok()) {
        return b;
    }
    product_nodes * (max1 as usize + 1) * (max2 as usize + 1)
}

struct Search<T> {
    states: Vec<(usize, T)>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    exhaustive: bool,
}

/// Breadth-first search over `(product node, payload)` with duplicate
/// suppression, up to `max_depth` steps.
fn bfs<T, F>(start: Vec<(usize, T)>, max_depth: usize, mut step: F) -> Search<T>
where
    T: Clone + Eq + std::hash::Hash,
    F: FnMut(usize, &T) -> Vec<(usize, T)>,
{
    let mut seen: HashMap<(usize, T), usize> = HashMap::new();
    let mut s = Search { states: Vec::new(), parent: Vec::new(), depth: Vec::new(), exhaustive: true };
    let mut queue = VecDeque::new();
    for st in start {
        if !seen.contains_key(&st) {
            seen.insert(st.clone(), s.states.len());
            queue.push_back(s.states.len());
            s.states.push(st);
            s.parent.push(None);
            s.depth.push(1);
        }
    }
    while let Some(k) = queue.pop_front() {
        let (p, t) = s.states[k].clone();
        let succ = step(p, &t);
        if s.depth[k] >= max_depth {
            if succ.iter().any(|st| !seen.contains_key(st)) {
                s.exhaustive = false;
            }
            continue;
        }
        for st in succ {
            if seen.contains_key(&st) {
                continue;
            }
            seen.insert(st.clone(), s.states.len());
            queue.push_back(s.states.len());
            s.states.push(st);
            s.parent.push(Some(k));
            s.depth.push(s.depth[k] + 1);
        }
    }
    s
}

impl<T> Search<T> {
    fn path(&self, mut k: usize) -> Vec<usize> {
        let mut out = vec![self.states[k].0];
        while let Some(p) = self.parent[k] {
            out.push(self.states[p].0);
            k = p;
        }
        out.reverse();
        out
    }
}

/// Tableau equivalence of two cores. `bound` limits `|stem| + |cycle|`;
/// `None` selects [`default_bound`].
pub fn core_equivalent(c1: &CoreGraph, c2: &CoreGraph, bound: Option<usize>) -> Verdict {
    core_equivalent_with(c1, c2, bound, Exec::default())
}

pub fn core_equivalent_with(c1: &CoreGraph, c2: &CoreGraph, bound: Option<usize>, exec: Exec) -> Verdict {
    let (b1, b2) = bisimulation(c1, c2);
    if b1[c1.root] != b2[c2.root] {
        return Verdict::Inequivalent(Counterexample::NotBisimilar {
            detail: format!("root {} is not bisimilar to root {}", describe(c1, c1.root), describe(c2, c2.root)),
        });
    }
    let prod = product(c1, c2, &b1, &b2);
    let bound = bound.unwrap_or_else(|| default_bound(prod.pairs.len(), c1.max_priority(), c2.max_priority()));

    // Formula sets reachable at each product node (the stems).
    let start = vec![(0usize, (c1.root_formulas(), c2.root_formulas()))];
    let stems = bfs(start, bound.max(1), |p, (s1, s2)| {
        let (x, y) = prod.pairs[p];
        prod.edges[p]
            .iter()
            .map(|&(t, i, j)| {
                let m1 = &c1.nodes[x].edges[i].trace;
                let m2 = &c2.nodes[y].edges[j].trace;
                (t, (m1.image(s1), m2.image(s2)))
            })
            .collect()
    });
    let mut by_node: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, (p, _)) in stems.states.iter().enumerate() {
        by_node.entry(*p).or_default().push(k);
    }
    let nodes: Vec<usize> = by_node.keys().copied().collect();

    // Closed walks at every product node, checked against every stem ending there.
    let results = exec.map(&nodes, |&p| {
        let min_stem = by_node[&p].iter().map(|&k| stems.depth[k] - 1).min().unwrap_or(0);
        let budget = bound.saturating_sub(min_stem).max(1);
        let first: Vec<(usize, (TraceMatrix, TraceMatrix))> = prod.edges[p]
            .iter()
            .map(|&(t, i, j)| {
                let (x, y) = prod.pairs[p];
                (t, (c1.nodes[x].edges[i].trace.clone(), c2.nodes[y].edges[j].trace.clone()))
            })
            .collect();
        let cycles = bfs(first, budget, |q, (m1, m2)| {
            let (x, y) = prod.pairs[q];
            prod.edges[q]
                .iter()
                .map(|&(t, i, j)| {
                    (t, (m1.compose(&c1.nodes[x].edges[i].trace), m2.compose(&c2.nodes[y].edges[j].trace)))
                })
                .collect()
        });
        let mut exhaustive = cycles.exhaustive;
        for (k, (q, (m1, m2))) in cycles.states.iter().enumerate() {
            if *q != p {
                continue;
            }
            let (t1, t2) = (m1.plus(), m2.plus());
            for &s in &by_node[&p] {
                let (s1, s2) = &stems.states[s].1;
                if stems.depth[s] - 1 + cycles.depth[k] > bound {
                    exhaustive = false;
                    continue;
                }
                let odd1 = t1.has_mu_trace(s1);
                let odd2 = t2.has_mu_trace(s2);
                if odd1 != odd2 {
                    let stem_nodes = stems.path(s);
                    let mut cycle_nodes = vec![p];
                    cycle_nodes.extend(cycles.path(k));
                    cycle_nodes.pop();
                    let lasso = ProductLasso {
                        stem: stem_nodes[..stem_nodes.len() - 1].iter().map(|&n| prod.pairs[n]).collect(),
                        cycle: cycle_nodes.iter().map(|&n| prod.pairs[n]).collect(),
                    };
                    return Err(Counterexample::ParityMismatch { lasso, left_odd: odd1, right_odd: odd2 });
                }
            }
        }
        Ok(exhaustive)
    });
    let mut exhaustive = stems.exhaustive;
    for r in results {
        match r {
            Ok(e) => exhaustive &= e,
            Err(c) => return Verdict::Inequivalent(c),
        }
    }
    Verdict::Equivalent { bound, exhaustive }
}

/// Builds both tableaux and compares their cores.
pub fn formulas_equivalent(f1: &Formula, f2: &Formula, bound: Option<usize>) -> Result<Verdict> {
    let c1 = crate::core_graph::extract_core(&build_label_graph(f1)?);
    let c2 = crate::core_graph::extract_core(&build_label_graph(f2)?);
    Ok(core_equivalent(&c1, &c2, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{gen_alpha, gen_beta, gen_simple_pair};
    use crate::parse::parse_formula;

    fn eq(a: &str, b: &str) -> Verdict {
        formulas_equivalent(&parse_formula(a).unwrap(), &parse_formula(b).unwrap(), None).unwrap()
    }

    #[test]
    fn corpus_pairs() {
        let (d, p) = gen_simple_pair();
        let v = formulas_equivalent(&d, &p, None).unwrap();
        assert!(matches!(v, Verdict::Equivalent { exhaustive: true, .. }), "{v:?}");
        let v = formulas_equivalent(&gen_alpha(), &gen_beta(), None).unwrap();
        assert!(matches!(v, Verdict::Equivalent { exhaustive: true, .. }), "{v:?}");
    }

    #[test]
    fn excluded_middle_is_not_top() {
        assert!(matches!(eq("p | ~p", "tt"), Verdict::Inequivalent(Counterexample::NotBisimilar { .. })));
    }

    #[test]
    fn swapped_fixpoints_differ_in_parity() {
        let v = eq("nu X. mu Y. (a & ->{X}) | (~a & ->{Y})", "mu X. nu Y. (a & ->{X}) | (~a & ->{Y})");
        assert!(matches!(v, Verdict::Inequivalent(Counterexample::ParityMismatch { .. })), "{v:?}");
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let c1 = crate::core_graph::extract_core(&build_label_graph(&gen_alpha()).unwrap());
        let c2 = crate::core_graph::extract_core(&build_label_graph(&gen_beta()).unwrap());
        assert_eq!(
            core_equivalent_with(&c1, &c2, None, Exec::Sequential),
            core_equivalent_with(&c1, &c2, None, Exec::Parallel)
        );
    }
}
