//! Tableau cores: the branching skeleton of a label graph (or of a tree with
//! back edges) with unary chains collapsed into composed trace matrices and
//! nested choices flattened into one multi-way choice.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{literals_consistent, Literal};
use crate::tableau::{LabelGraph, NodeKind};
use crate::trace::TraceMatrix;
use crate::twb::{TreeWithBackEdges, TwbKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreKind {
    Choice,
    Modal,
    Leaf,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoreEdge {
    pub target: usize,
    pub trace: TraceMatrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoreNode {
    pub kind: CoreKind,
    pub literals: BTreeSet<Literal>,
    pub edges: Vec<CoreEdge>,
    /// Node of the source graph this node stands for.
    pub origin: usize,
    pub name: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoreGraph {
    pub nodes: Vec<CoreNode>,
    pub root: usize,
    /// Trace matrix from the source root to the core root.
    pub entry: TraceMatrix,
    /// Formulas traces start from at the source root.
    pub start: BTreeSet<usize>,
}

impl CoreGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Formulas present at the core root.
    pub fn root_formulas(&self) -> BTreeSet<usize> {
        self.entry.image(&self.start)
    }

    pub fn max_priority(&self) -> u32 {
        self.nodes
            .iter()
            .flat_map(|n| n.edges.iter().map(|e| e.trace.max_weight()))
            .chain([self.entry.max_weight()])
            .max()
            .unwrap_or(0)
    }

    pub fn count(&self, kind: CoreKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.edges.len()).sum()
    }

    /// Composed matrix of a walk given as `(node, edge index)` steps.
    pub fn walk_matrix(&self, walk: &[(usize, usize)]) -> TraceMatrix {
        let mut it = walk.iter();
        let Some(&(n, e)) = it.next() else {
            return TraceMatrix::new();
        };
        let mut m = self.nodes[n].edges[e].trace.clone();
        for &(n, e) in it {
            m = m.compose(&self.nodes[n].edges[e].trace);
        }
        m
    }

    /// Parity of the lasso `stem . cycle^omega`; both are `(node, edge index)`
    /// walks, `stem` starting at the core root and `cycle` closed.
    pub fn lasso_is_odd(&self, stem: &[(usize, usize)], cycle: &[(usize, usize)]) -> bool {
        let at = if stem.is_empty() { self.root_formulas() } else { self.walk_matrix(stem).image(&self.root_formulas()) };
        self.walk_matrix(cycle).has_mu_trace(&at)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum RawKind {
    Choice,
    Modal,
    Leaf,
    Unary,
}

/// Any rooted graph with trace-annotated edges.
pub(crate) struct RawGraph {
    pub kinds: Vec<RawKind>,
    pub literals: Vec<BTreeSet<Literal>>,
    pub children: Vec<Vec<(usize, TraceMatrix)>>,
    pub names: Vec<String>,
    pub root: usize,
    pub entry: TraceMatrix,
    pub start: BTreeSet<usize>,
}

impl RawGraph {
    fn resolve(&self, mut n: usize, mut m: TraceMatrix) -> Result<(usize, TraceMatrix)> {
        let mut seen = BTreeSet::new();
        while self.kinds[n] == RawKind::Unary {
            if !seen.insert(n) {
                return Err(Error::MalformedTree(format!("unguarded cycle through {}", self.names[n])));
            }
            let (c, e) = &self.children[n][0];
            m = m.compose(e);
            n = *c;
        }
        Ok((n, m))
    }

    fn flatten(&self, n: usize, prefix: &TraceMatrix, stack: &mut Vec<usize>, out: &mut Vec<(usize, TraceMatrix)>) -> Result<()> {
        stack.push(n);
        for (c, e) in &self.children[n] {
            let (x, m) = self.resolve(*c, prefix.compose(e))?;
            if self.kinds[x] == RawKind::Choice {
                if stack.contains(&x) {
                    return Err(Error::MalformedTree(format!("unguarded cycle through {}", self.names[x])));
                }
                self.flatten(x, &m, stack, out)?;
            } else {
                out.push((x, m));
            }
        }
        stack.pop();
        Ok(())
    }

    fn edges(&self, n: usize) -> Result<Vec<(usize, TraceMatrix)>> {
        let mut out: Vec<(usize, TraceMatrix)> = Vec::new();
        match self.kinds[n] {
            RawKind::Choice => {
                let id = TraceMatrix::identity(self.universe(n));
                self.flatten(n, &id, &mut Vec::new(), &mut out)?;
            }
            RawKind::Modal => {
                for (c, e) in &self.children[n] {
                    out.push(self.resolve(*c, e.clone())?);
                }
            }
            RawKind::Leaf | RawKind::Unary => {}
        }
        // Parallel edges survive unless they carry the same traces.
        let mut dedup: Vec<(usize, TraceMatrix)> = Vec::new();
        for e in out {
            if !dedup.contains(&e) {
                dedup.push(e);
            }
        }
        Ok(dedup)
    }

    /// Formulas that may occur as trace rows at `n`.
    fn universe(&self, n: usize) -> BTreeSet<usize> {
        self.children[n].iter().flat_map(|(_, e)| e.entries().map(|((f, _), _)| f)).collect()
    }

    pub fn core(&self) -> Result<CoreGraph> {
        let (root, entry) = self.resolve(self.root, self.entry.clone())?;
        let mut ids: HashMap<usize, usize> = HashMap::from([(root, 0)]);
        let mut order = vec![root];
        let mut queue = VecDeque::from([root]);
        let mut edges: Vec<Vec<(usize, TraceMatrix)>> = Vec::new();
        while let Some(n) = queue.pop_front() {
            let es = self.edges(n)?;
            for (x, _) in &es {
                if !ids.contains_key(x) {
                    ids.insert(*x, order.len());
                    order.push(*x);
                    queue.push_back(*x);
                }
            }
            edges.push(es);
        }
        let nodes = order
            .iter()
            .zip(edges)
            .map(|(&n, es)| CoreNode {
                kind: match self.kinds[n] {
                    RawKind::Choice => CoreKind::Choice,
                    RawKind::Modal => CoreKind::Modal,
                    _ => CoreKind::Leaf,
                },
                literals: self.literals[n].clone(),
                edges: es.into_iter().map(|(x, trace)| CoreEdge { target: ids[&x], trace }).collect(),
                origin: n,
                name: self.names[n].clone(),
            })
            .collect();
        Ok(CoreGraph { nodes, root: 0, entry, start: self.start.clone() })
    }
}

pub(crate) fn raw_of_label_graph(g: &LabelGraph) -> RawGraph {
    let kinds = g
        .nodes
        .iter()
        .map(|n| match n.kind {
            NodeKind::Choice if n.children.len() >= 2 => RawKind::Choice,
            NodeKind::Choice | NodeKind::Unary => RawKind::Unary,
            NodeKind::Modal => RawKind::Modal,
            NodeKind::Leaf => RawKind::Leaf,
        })
        .collect();
    RawGraph {
        kinds,
        literals: g.nodes.iter().map(|n| n.literals.clone()).collect(),
        children: g.nodes.iter().map(|n| n.children.iter().map(|e| (e.target, e.trace.clone())).collect()).collect(),
        names: (0..g.len()).map(|i| g.label_text(i)).collect(),
        root: g.root,
        entry: TraceMatrix::identity(g.start()),
        start: g.start(),
    }
}

pub fn extract_core(g: &LabelGraph) -> CoreGraph {
    raw_of_label_graph(g).core().expect("label graphs of guarded formulas have no unguarded cycles")
}

/// Raw view of a tree with back edges: one trace element, and every edge
/// carries the priority of the node it enters.
pub(crate) fn raw_of_twb(t: &TreeWithBackEdges) -> RawGraph {
    let mut kinds = Vec::new();
    let mut literals = Vec::new();
    let mut children = Vec::new();
    let step = |target: usize| (target, TraceMatrix::single(0, 0, t.nodes[target].priority));
    for n in &t.nodes {
        let (kind, lits, kids) = match n.kind {
            TwbKind::Modal if !literals_consistent(&n.literals) => (RawKind::Leaf, n.literals.clone(), Vec::new()),
            TwbKind::Modal => (RawKind::Modal, n.literals.clone(), n.children.iter().map(|&c| step(c)).collect()),
            TwbKind::Leaf => (RawKind::Leaf, n.literals.clone(), Vec::new()),
            TwbKind::Choice => match n.children.len() {
                0 => (RawKind::Leaf, BTreeSet::from([Literal::False]), Vec::new()),
                1 => (RawKind::Unary, BTreeSet::new(), vec![step(n.children[0])]),
                _ => (RawKind::Choice, BTreeSet::new(), n.children.iter().map(|&c| step(c)).collect()),
            },
            TwbKind::Jump => (RawKind::Unary, BTreeSet::new(), vec![step(n.back.expect("jump target"))]),
        };
        kinds.push(kind);
        literals.push(lits);
        children.push(kids);
    }
    RawGraph {
        kinds,
        literals,
        children,
        names: (0..t.len()).map(|i| format!("n{i}")).collect(),
        root: t.root,
        entry: TraceMatrix::single(0, 0, t.nodes[t.root].priority),
        start: BTreeSet::from([0]),
    }
}

/// Core of a tree with back edges. Fails on cycles that never pass a
/// modal node.
pub fn core_of_twb(t: &TreeWithBackEdges) -> Result<CoreGraph> {
    raw_of_twb(t).core()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;
    use crate::tableau::build_label_graph;
    use crate::twb::parse_twb;

    fn core_of(text: &str) -> CoreGraph {
        extract_core(&build_label_graph(&parse_formula(text).unwrap()).unwrap())
    }

    #[test]
    fn simple_pair_skeletons() {
        for text in ["nu X. mu Y. (a & ->{X}) | (~a & ->{Y})", "nu Y. ->{Y} & mu X. (~a & ->{X}) | a"] {
            let c = core_of(text);
            assert_eq!(c.count(CoreKind::Choice), 1, "{text}");
            assert_eq!(c.count(CoreKind::Modal), 2, "{text}");
            assert_eq!(c.nodes[c.root].kind, CoreKind::Choice);
        }
    }

    #[test]
    fn leaf_only_core() {
        let c = core_of("a & b");
        assert_eq!(c.len(), 1);
        assert_eq!(c.nodes[0].kind, CoreKind::Leaf);
    }

    #[test]
    fn twb_core_and_unguarded_cycles() {
        let t = parse_twb("root n0\nnode n0 kind=modal prio=1 children=n1\nnode n1 back=n0\n").unwrap();
        let c = core_of_twb(&t).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.lasso_is_odd(&[], &[(0, 0)]));
        let bad = parse_twb("root n0\nnode n0 kind=or children=n1\nnode n1 back=n0\n").unwrap();
        assert!(core_of_twb(&bad).is_err());
    }
}
