//! Node priorities for tableau cores, and the pipeline from a formula to its
//! disjunctive representative.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::core_graph::{extract_core, CoreGraph, CoreKind};
use crate::disjunctive::{reorder_decreasing, tree_to_disjunctive};
use crate::error::{Error, Result};
use crate::formula::{ensure_well_formed, Formula};
use crate::graph::cyclic_sccs;
use crate::index::{find_max_witness, minimize};
use crate::par::Exec;
use crate::tableau::build_label_graph;
use crate::trace::TraceMatrix;
use crate::twb::{TreeWithBackEdges, TwbNode};
use crate::zielonka::{EdgeView, ZielonkaForest};

/// Core node, Zielonka leaf, and the tree node behind the last memory move.
type Memory = (usize, Option<usize>, Option<usize>);

#[derive(Clone, Copy, Debug)]
pub struct AssignOptions {
    /// Refinement rounds tried after the plain unfolding fails: Zielonka
    /// memory, Zielonka memory with the last decision, then plain unfoldings
    /// with more copies of each core node per root path.
    pub dup_budget: usize,
    pub node_cap: usize,
    pub exec: Exec,
}

impl Default for AssignOptions {
    fn default() -> Self {
        AssignOptions { dup_budget: 3, node_cap: 200_000, exec: Exec::default() }
    }
}

struct Ctx<'a, S> {
    core: &'a CoreGraph,
    node_of: &'a dyn Fn(&S) -> usize,
    step: Step<'a, S>,
    offsets: &'a [usize],
    repeats: usize,
    cap: usize,
}

/// A core unfolded into a tree with back edges, with the trace matrix of
/// every graph edge and the formulas present at every node.
struct Unfolding {
    nodes: Vec<TwbNode>,
    succ: Vec<Vec<(usize, TraceMatrix)>>,
    universe: Vec<BTreeSet<usize>>,
}

type Step<'a, S> = &'a dyn Fn(&S, usize, usize) -> S;

impl Unfolding {
    /// Unfolds the states reachable from `root` depth first. A state maps to a
    /// core node through `node_of`; `step(s, i, e)` follows edge `i` of that
    /// node, `e` being its global edge index. A child becomes a back edge once
    /// its state already occurs `repeats` times on the root path.
    fn build<S: Clone + Eq>(
        core: &CoreGraph,
        root: S,
        node_of: &dyn Fn(&S) -> usize,
        step: Step<S>,
        repeats: usize,
        cap: usize,
    ) -> Result<Unfolding> {
        let mut u = Unfolding { nodes: Vec::new(), succ: Vec::new(), universe: Vec::new() };
        let offsets: Vec<usize> = core
            .nodes
            .iter()
            .scan(0, |acc, n| {
                let o = *acc;
                *acc += n.edges.len();
                Some(o)
            })
            .collect();
        let mut path = Vec::new();
        let ctx = Ctx { core, node_of, step, offsets: &offsets, repeats, cap };
        u.visit(&ctx, root, core.root_formulas(), &mut path)?;
        Ok(u)
    }

    fn add(&mut self, node: TwbNode, universe: BTreeSet<usize>, cap: usize) -> Result<usize> {
        if self.nodes.len() >= cap {
            return Err(Error::Budget(format!("unfolded tree exceeds {cap} nodes")));
        }
        self.nodes.push(node);
        self.succ.push(Vec::new());
        self.universe.push(universe);
        Ok(self.nodes.len() - 1)
    }

    fn visit<S: Clone + Eq>(
        &mut self,
        ctx: &Ctx<S>,
        state: S,
        universe: BTreeSet<usize>,
        path: &mut Vec<(S, usize)>,
    ) -> Result<usize> {
        let c = (ctx.node_of)(&state);
        let cn = &ctx.core.nodes[c];
        let node = match cn.kind {
            CoreKind::Choice => TwbNode::choice(Vec::new()),
            CoreKind::Modal => TwbNode::modal(cn.literals.clone(), Vec::new()),
            CoreKind::Leaf => TwbNode::leaf(cn.literals.clone()),
        };
        let v = self.add(node, universe.clone(), ctx.cap)?;
        path.push((state.clone(), v));
        for (i, e) in cn.edges.iter().enumerate() {
            let next = (ctx.step)(&state, i, ctx.offsets[c] + i);
            let below = e.trace.image(&universe);
            let copies: Vec<usize> = path.iter().filter(|(s, _)| *s == next).map(|(_, pv)| *pv).collect();
            let child = if copies.len() >= ctx.repeats {
                let target = *copies.last().expect("repeats >= 1");
                let j = self.add(TwbNode::jump(target), below.clone(), ctx.cap)?;
                self.succ[j].push((target, TraceMatrix::identity(below)));
                j
            } else {
                self.visit(ctx, next, below, path)?
            };
            self.nodes[v].children.push(child);
            self.succ[v].push((child, e.trace.clone()));
        }
        path.pop();
        Ok(v)
    }

    /// Node priorities for the unfolding, or two closed walks of different
    /// parity through a node that admits no top priority.
    fn color(self, exec: Exec) -> std::result::Result<Result<TreeWithBackEdges>, (Vec<usize>, Vec<usize>)> {
        let adj = self.adjacency();
        let mut prio = vec![0; self.nodes.len()];
        for comp in cyclic_sccs(&adj, &vec![true; adj.len()]) {
            self.decompose(&adj, &comp, &mut prio, exec)?;
        }
        let nodes = self.nodes.into_iter().zip(prio).map(|(n, p)| n.with_priority(p)).collect();
        Ok(TreeWithBackEdges::new(nodes, 0))
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        self.succ.iter().map(|s| s.iter().map(|(w, _)| *w).collect()).collect()
    }

    /// Parities of the closed walks through `v` inside `within`, with one
    /// sample walk per parity found. Stops once both parities are seen.
    fn walk_parities(&self, v: usize, within: &[bool]) -> [Option<Vec<usize>>; 2] {
        let rows = &self.universe[v];
        let restrict = |m: &TraceMatrix| {
            let mut out = TraceMatrix::new();
            for ((f, g), mask) in m.entries() {
                if rows.contains(&f) {
                    out.insert_mask(f, g, mask);
                }
            }
            out
        };
        let mut found: [Option<Vec<usize>>; 2] = [None, None];
        let mut states: Vec<(usize, TraceMatrix, usize)> = Vec::new();
        let mut seen: HashMap<(usize, TraceMatrix), ()> = HashMap::new();
        let mut queue = VecDeque::new();
        for (w, m) in &self.succ[v] {
            if within[*w] {
                let key = (*w, restrict(m));
                if seen.insert(key.clone(), ()).is_none() {
                    states.push((key.0, key.1, usize::MAX));
                    queue.push_back(states.len() - 1);
                }
            }
        }
        while let Some(i) = queue.pop_front() {
            let (w, m) = (states[i].0, states[i].1.clone());
            if w == v {
                let parity = usize::from(m.has_mu_trace(rows));
                if found[parity].is_none() {
                    let mut walk = vec![v];
                    let mut k = states[i].2;
                    while k != usize::MAX {
                        walk.push(states[k].0);
                        k = states[k].2;
                    }
                    walk[1..].reverse();
                    found[parity] = Some(walk);
                    if found.iter().all(Option::is_some) {
                        break;
                    }
                }
            }
            for (x, e) in &self.succ[w] {
                if within[*x] {
                    let key = (*x, m.compose(e));
                    if seen.insert(key.clone(), ()).is_none() {
                        states.push((key.0, key.1, i));
                        queue.push_back(states.len() - 1);
                    }
                }
            }
        }
        found
    }

    /// Gives the nodes of `comp` whose closed walks all share one parity the
    /// highest value in `comp`, and recurses on what remains. Returns that
    /// value, or the two conflicting walks when no node qualifies.
    fn decompose(
        &self,
        adj: &[Vec<usize>],
        comp: &[usize],
        prio: &mut [u32],
        exec: Exec,
    ) -> std::result::Result<u32, (Vec<usize>, Vec<usize>)> {
        let mut within = vec![false; adj.len()];
        for &v in comp {
            within[v] = true;
        }
        let parities = exec.map(comp, |&v| self.walk_parities(v, &within));
        let pure = |p: usize| -> Vec<usize> {
            comp.iter()
                .zip(&parities)
                .filter(|(_, f)| f[p].is_some() && f[1 - p].is_none())
                .map(|(&v, _)| v)
                .collect()
        };
        let (top, parity) = match (pure(1), pure(0)) {
            (odd, _) if !odd.is_empty() => (odd, 1),
            (_, even) if !even.is_empty() => (even, 0),
            _ => {
                let f = parities.iter().find(|f| f[0].is_some() && f[1].is_some()).unwrap_or(&parities[0]);
                return Err((f[0].clone().unwrap_or_default(), f[1].clone().unwrap_or_default()));
            }
        };
        let mut rest = within;
        for &v in &top {
            rest[v] = false;
        }
        let mut inner = 0;
        for c in cyclic_sccs(adj, &rest) {
            inner = inner.max(self.decompose(adj, &c, prio, exec)?);
        }
        let value = if inner % 2 == parity { inner } else { inner + 1 };
        for v in top {
            prio[v] = value;
        }
        Ok(value)
    }
}

/// Node priorities for a tableau core: unfolds it into a tree with back edges
/// and assigns priorities so that every cycle of the tree has the parity of
/// the matching core lasso. When a root path with one copy of each core node
/// admits no such assignment, more copies are allowed, up to the budget.
pub fn assign_node_priorities(core: &CoreGraph) -> Result<TreeWithBackEdges> {
    assign_node_priorities_with(core, AssignOptions::default())
}

pub fn assign_node_priorities_with(core: &CoreGraph, opts: AssignOptions) -> Result<TreeWithBackEdges> {
    let node_of = |v: &usize| *v;
    let follow = |v: &usize, i: usize, _: usize| core.nodes[*v].edges[i].target;
    let plain = Unfolding::build(core, core.root, &node_of, &follow, 1, opts.node_cap)?;
    let mut conflict = match plain.color(opts.exec) {
        Ok(t) => return t,
        Err(walks) => walks,
    };
    let mut view = EdgeView::new(core);
    let forest = ZielonkaForest::build(&mut view, opts.node_cap)?;
    let entry = (0..view.edges.len()).find(|&e| view.edges[e].0 == core.root).and_then(|e| forest.tree_of_edge[e]);
    let start = (core.root, entry.map(|r| forest.leftmost_leaf(r)), None);
    let node_of = |s: &Memory| s.0;
    for round in 1..=opts.dup_budget {
        let u = match round {
            // Core node and Zielonka leaf.
            1 => {
                let step = |s: &Memory, i: usize, e: usize| (core.nodes[s.0].edges[i].target, forest.step(s.1, e).0, None);
                Unfolding::build(core, start, &node_of, &step, 1, opts.node_cap)?
            }
            // Also the tree node that decided the last move.
            2 => {
                let step = |s: &Memory, i: usize, e: usize| {
                    let (leaf, by) = forest.step(s.1, e);
                    (core.nodes[s.0].edges[i].target, leaf, by)
                };
                Unfolding::build(core, start, &node_of, &step, 1, opts.node_cap)?
            }
            // Plain unfolding with more copies per root path.
            r => Unfolding::build(core, core.root, &|v: &usize| *v, &follow, r - 1, opts.node_cap)?,
        };
        match u.color(opts.exec) {
            Ok(t) => return t,
            Err(walks) => conflict = walks,
        }
    }
    let (even, odd) = conflict;
    Err(Error::Budget(format!(
        "no consistent priorities after {} refinements; the closed walks {even:?} (even) and {odd:?} (odd) share a node",
        opts.dup_budget
    )))
}

/// Priority profile of the least tree with back edges representing a formula.
#[derive(Clone, Debug, Serialize)]
pub struct AlternationDepth {
    pub tree: TreeWithBackEdges,
    /// Priorities in use after minimization.
    pub codomain: Vec<u32>,
    pub witness_q: u32,
}

impl AlternationDepth {
    pub fn nonzero(&self) -> usize {
        self.codomain.iter().filter(|&&p| p > 0).count()
    }

    pub fn max(&self) -> u32 {
        self.codomain.last().copied().unwrap_or(0)
    }
}

pub fn minimized_tree(f: &Formula) -> Result<TreeWithBackEdges> {
    ensure_well_formed(f)?;
    let core = extract_core(&build_label_graph(f)?);
    Ok(minimize(&assign_node_priorities(&core)?)?.compress())
}

pub fn tableau_alternation_depth(f: &Formula) -> Result<AlternationDepth> {
    let tree = minimized_tree(f)?;
    let codomain: BTreeSet<u32> = tree.priorities().into_iter().collect();
    let witness_q = find_max_witness(&tree).q;
    Ok(AlternationDepth { tree, codomain: codomain.into_iter().collect(), witness_q })
}

/// The disjunctive formula read off the minimized, reordered tree of `f`.
pub fn djf(f: &Formula) -> Result<Formula> {
    tree_to_disjunctive(&reorder_decreasing(&minimized_tree(f)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{gen_alpha, gen_finite, gen_simple_pair};
    use crate::disjunctive::is_disjunctive;
    use crate::equiv::formulas_equivalent;

    #[test]
    fn alpha_needs_four_priorities() {
        let d = tableau_alternation_depth(&gen_alpha()).unwrap();
        assert_eq!(d.codomain, vec![0, 1, 2, 3]);
        assert_eq!(d.witness_q, 3);
    }

    #[test]
    fn simple_plain_matches_its_twin() {
        let (_, plain) = gen_simple_pair();
        assert_eq!(tableau_alternation_depth(&plain).unwrap().max(), 2);
    }

    #[test]
    fn finite_paths_drop_nu() {
        let f = gen_finite(&gen_alpha()).unwrap();
        let g = djf(&f).unwrap();
        assert!(!g.has_nu());
        assert!(is_disjunctive(&g));
        assert!(formulas_equivalent(&f, &g, None).unwrap().is_equivalent());
    }

    #[test]
    fn djf_round_trip() {
        let (_, plain) = gen_simple_pair();
        let g = djf(&plain).unwrap();
        assert!(is_disjunctive(&g));
        assert!(formulas_equivalent(&plain, &g, None).unwrap().is_equivalent());
    }
}
