//! Zielonka trees over the edge sets of a tableau core.
//!
//! A strongly connected set of core edges has a parity: that of the lasso
//! which loops through all its edges. Each tree node holds such a set; its
//! children are the maximal strongly connected subsets of the opposite
//! parity. Following the tree round-robin as edges are read gives a
//! deterministic memory under which the parity of a path is decided by the
//! deepest node visited infinitely often.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::core_graph::CoreGraph;
use crate::error::{Error, Result};
use crate::graph::cyclic_sccs;
use crate::trace::TraceMatrix;

pub type EdgeSet = Vec<bool>;

/// The core as a flat edge list with the formulas present at each node.
pub struct EdgeView<'a> {
    pub core: &'a CoreGraph,
    /// `(source, edge index at source, target)`.
    pub edges: Vec<(usize, usize, usize)>,
    pub universe: Vec<BTreeSet<usize>>,
    parity_cache: HashMap<EdgeSet, bool>,
}

impl<'a> EdgeView<'a> {
    pub fn new(core: &'a CoreGraph) -> Self {
        let mut edges = Vec::new();
        for (v, n) in core.nodes.iter().enumerate() {
            for (i, e) in n.edges.iter().enumerate() {
                edges.push((v, i, e.target));
            }
        }
        let mut universe = vec![BTreeSet::new(); core.len()];
        universe[core.root] = core.root_formulas();
        let mut queue = VecDeque::from([core.root]);
        while let Some(v) = queue.pop_front() {
            for e in &core.nodes[v].edges {
                let img = e.trace.image(&universe[v]);
                if !img.is_subset(&universe[e.target]) {
                    universe[e.target].extend(img);
                    queue.push_back(e.target);
                }
            }
        }
        EdgeView { core, edges, universe, parity_cache: HashMap::new() }
    }

    fn matrix(&self, e: usize) -> &TraceMatrix {
        let (v, i, _) = self.edges[e];
        &self.core.nodes[v].edges[i].trace
    }

    pub fn all(&self) -> EdgeSet {
        vec![true; self.edges.len()]
    }

    /// Edge sets of the cyclic components of the subgraph formed by `set`.
    pub fn components(&self, set: &EdgeSet) -> Vec<EdgeSet> {
        let mut adj = vec![Vec::new(); self.core.len()];
        for (e, &(v, _, w)) in self.edges.iter().enumerate() {
            if set[e] {
                adj[v].push(w);
            }
        }
        let mut comp_of = vec![usize::MAX; self.core.len()];
        let comps = cyclic_sccs(&adj, &vec![true; self.core.len()]);
        for (i, c) in comps.iter().enumerate() {
            for &v in c {
                comp_of[v] = i;
            }
        }
        let mut out = vec![vec![false; self.edges.len()]; comps.len()];
        for (e, &(v, _, w)) in self.edges.iter().enumerate() {
            if set[e] && comp_of[v] != usize::MAX && comp_of[v] == comp_of[w] {
                out[comp_of[v]][e] = true;
            }
        }
        out
    }

    fn path(&self, set: &EdgeSet, from: usize, to: usize) -> Vec<usize> {
        let mut prev: HashMap<usize, usize> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = HashSet::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for (e, &(a, _, b)) in self.edges.iter().enumerate() {
                if set[e] && a == v && seen.insert(b) {
                    prev.insert(b, e);
                    queue.push_back(b);
                }
            }
        }
        let mut out = Vec::new();
        let mut cur = to;
        while cur != from {
            let e = prev[&cur];
            out.push(e);
            cur = self.edges[e].0;
        }
        out.reverse();
        out
    }

    /// Whether looping through every edge of the strongly connected `set`
    /// yields a mu-trace.
    pub fn is_odd(&mut self, set: &EdgeSet) -> bool {
        if let Some(&p) = self.parity_cache.get(set) {
            return p;
        }
        let ids: Vec<usize> = (0..set.len()).filter(|&e| set[e]).collect();
        let base = self.edges[ids[0]].0;
        let mut walk = Vec::new();
        let mut at = base;
        for &e in &ids {
            walk.extend(self.path(set, at, self.edges[e].0));
            walk.push(e);
            at = self.edges[e].2;
        }
        walk.extend(self.path(set, at, base));
        let mut m = TraceMatrix::identity(self.universe[base].iter().copied());
        for e in walk {
            m = m.compose(self.matrix(e));
        }
        let odd = m.has_mu_trace(&self.universe[base]);
        self.parity_cache.insert(set.clone(), odd);
        odd
    }

    /// Parities of the closed walks inside `set` that use edge `e`. Stops as
    /// soon as both parities are seen.
    fn walk_parities(&self, set: &EdgeSet, e: usize) -> [bool; 2] {
        let (src, _, dst) = self.edges[e];
        let rows = &self.universe[src];
        let mut first = TraceMatrix::new();
        for ((f, g), mask) in self.matrix(e).entries() {
            if rows.contains(&f) {
                first.insert_mask(f, g, mask);
            }
        }
        let mut found = [false; 2];
        let mut seen = HashSet::from([(dst, first.clone())]);
        let mut queue = VecDeque::from([(dst, first)]);
        while let Some((v, m)) = queue.pop_front() {
            if v == src {
                found[usize::from(m.has_mu_trace(rows))] = true;
                if found[0] && found[1] {
                    break;
                }
            }
            for (x, &(a, _, b)) in self.edges.iter().enumerate() {
                if set[x] && a == v {
                    let next = (b, m.compose(self.matrix(x)));
                    if seen.insert(next.clone()) {
                        queue.push_back(next);
                    }
                }
            }
        }
        found
    }

    /// Maximal strongly connected subsets of `set` whose parity differs from
    /// `odd`.
    pub fn maximal_opposite(&mut self, set: &EdgeSet, odd: bool, cap: usize) -> Result<Vec<EdgeSet>> {
        let want = !odd;
        let mut found: Vec<EdgeSet> = Vec::new();
        let mut seen: HashSet<EdgeSet> = HashSet::from([set.clone()]);
        let mut stack = vec![set.clone()];
        while let Some(x) = stack.pop() {
            if seen.len() > cap {
                return Err(Error::Budget(format!("more than {cap} edge sets while splitting a component")));
            }
            // Edges all of whose closed walks have the current parity cannot
            // belong to a subset of the other parity.
            let mut trimmed = x.clone();
            for e in 0..x.len() {
                if x[e] && !self.walk_parities(&x, e)[usize::from(want)] {
                    trimmed[e] = false;
                }
            }
            let mut next = Vec::new();
            if trimmed == x {
                for e in 0..x.len() {
                    if x[e] {
                        let mut y = x.clone();
                        y[e] = false;
                        next.extend(self.components(&y));
                    }
                }
            } else {
                next = self.components(&trimmed);
            }
            for c in next {
                if self.is_odd(&c) == want {
                    if !found.contains(&c) {
                        found.push(c);
                    }
                } else if seen.insert(c.clone()) {
                    stack.push(c);
                }
            }
        }
        let subset = |a: &EdgeSet, b: &EdgeSet| a.iter().zip(b).all(|(x, y)| !x || *y);
        let maximal = found
            .iter()
            .filter(|a| !found.iter().any(|b| b != *a && subset(a, b)))
            .cloned()
            .collect();
        Ok(maximal)
    }
}

pub struct ZNode {
    pub set: EdgeSet,
    pub odd: bool,
    pub depth: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// One tree per cyclic component of the core.
pub struct ZielonkaForest {
    pub nodes: Vec<ZNode>,
    pub roots: Vec<usize>,
    /// Root of the tree whose set holds each edge (`None` for edges on no cycle).
    pub tree_of_edge: Vec<Option<usize>>,
}

impl ZielonkaForest {
    pub fn build(view: &mut EdgeView, cap: usize) -> Result<ZielonkaForest> {
        let mut f = ZielonkaForest { nodes: Vec::new(), roots: Vec::new(), tree_of_edge: vec![None; view.edges.len()] };
        for comp in view.components(&view.all()) {
            let odd = view.is_odd(&comp);
            for (e, &inside) in comp.iter().enumerate() {
                if inside {
                    f.tree_of_edge[e] = Some(f.nodes.len());
                }
            }
            f.roots.push(f.nodes.len());
            let mut stack = vec![f.nodes.len()];
            f.nodes.push(ZNode { set: comp, odd, depth: 0, parent: None, children: Vec::new() });
            while let Some(n) = stack.pop() {
                let (set, odd, depth) = (f.nodes[n].set.clone(), f.nodes[n].odd, f.nodes[n].depth);
                for sub in view.maximal_opposite(&set, odd, cap)? {
                    let id = f.nodes.len();
                    f.nodes.push(ZNode { set: sub, odd: !odd, depth: depth + 1, parent: Some(n), children: Vec::new() });
                    f.nodes[n].children.push(id);
                    stack.push(id);
                }
            }
        }
        Ok(f)
    }

    pub fn leftmost_leaf(&self, mut n: usize) -> usize {
        while let Some(&c) = self.nodes[n].children.first() {
            n = c;
        }
        n
    }

    fn root_of(&self, mut n: usize) -> usize {
        while let Some(p) = self.nodes[n].parent {
            n = p;
        }
        n
    }

    /// Memory update on reading edge `e` in leaf `leaf`: the next leaf and the
    /// tree node that decided it.
    pub fn step(&self, leaf: Option<usize>, e: usize) -> (Option<usize>, Option<usize>) {
        let Some(root) = self.tree_of_edge[e] else {
            return (None, None);
        };
        let Some(leaf) = leaf.filter(|&l| self.root_of(l) == root) else {
            return (Some(self.leftmost_leaf(root)), None);
        };
        let mut below = leaf;
        let mut n = leaf;
        while !self.nodes[n].set[e] {
            below = n;
            n = self.nodes[n].parent.expect("the tree root holds every edge of its component");
        }
        if n == leaf {
            return (Some(leaf), Some(n));
        }
        let kids = &self.nodes[n].children;
        let i = kids.iter().position(|&c| c == below).expect("child on the path");
        (Some(self.leftmost_leaf(kids[(i + 1) % kids.len()])), Some(n))
    }

    pub fn height(&self) -> usize {
        self.nodes.iter().map(|n| n.depth + 1).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_graph::extract_core;
    use crate::corpus::gen_alpha_n;
    use crate::tableau::build_label_graph;

    fn forest(n: usize) -> (usize, Vec<usize>) {
        let core = extract_core(&build_label_graph(&gen_alpha_n(n).unwrap()).unwrap());
        let mut view = EdgeView::new(&core);
        let f = ZielonkaForest::build(&mut view, 10_000).unwrap();
        (f.height(), f.nodes.iter().map(|z| z.children.len()).collect())
    }

    #[test]
    fn alpha_family_trees() {
        let (h1, kids1) = forest(1);
        assert_eq!(h1, 4);
        assert!(kids1.iter().all(|&k| k <= 1));
        let (h2, kids2) = forest(2);
        assert_eq!(h2, 6);
        assert_eq!(kids2.iter().filter(|&&k| k == 2).count(), 1);
    }

    #[test]
    fn round_robin_memory() {
        let core = extract_core(&build_label_graph(&gen_alpha_n(2).unwrap()).unwrap());
        let mut view = EdgeView::new(&core);
        let f = ZielonkaForest::build(&mut view, 10_000).unwrap();
        let leaves: Vec<usize> = (0..f.nodes.len()).filter(|&n| f.nodes[n].children.is_empty()).collect();
        assert_eq!(leaves.len(), 2);
        // Some edge moves the memory from one leaf to the other.
        let moves = (0..view.edges.len()).any(|e| f.step(Some(leaves[0]), e).0 == Some(leaves[1]));
        assert!(moves);
    }
}
