//! The tableau of a formula folded into a finite graph of labels.
//!
//! A label is a set of closure ids. Rules are applied in a fixed order:
//! fixpoint unfolding, variable regeneration, conjunction, disjunction and
//! finally the modal rule. Within a rule the least eligible formula is chosen.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::closure::{CNode, Closure};
use crate::error::{Error, Result};
use crate::formula::{ensure_well_formed, literals_consistent, minimal_priority_assignment, Formula, Literal};
use crate::trace::TraceMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Choice,
    Modal,
    Unary,
    Leaf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Fix,
    Regen,
    And,
    Or,
    Modal,
}

#[derive(Clone, Debug, Serialize)]
pub struct LabelEdge {
    pub target: usize,
    pub trace: TraceMatrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct LabelNode {
    /// Sorted closure ids.
    pub label: Vec<usize>,
    pub kind: NodeKind,
    pub rule: Option<Rule>,
    pub children: Vec<LabelEdge>,
    /// Literals of modal nodes and leaves.
    pub literals: BTreeSet<Literal>,
}

#[derive(Clone, Debug)]
pub struct LabelGraph {
    pub closure: Closure,
    pub nodes: Vec<LabelNode>,
    pub root: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct TableauOptions {
    pub node_cap: usize,
    /// Apply the disjunction rule before the conjunction rule.
    pub or_before_and: bool,
}

impl Default for TableauOptions {
    fn default() -> Self {
        TableauOptions { node_cap: 100_000, or_before_and: false }
    }
}

impl LabelGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn label_text(&self, n: usize) -> String {
        let parts: Vec<&str> = self.nodes[n].label.iter().map(|&c| self.closure.text(c)).collect();
        format!("{{{}}}", parts.join(", "))
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<&TraceMatrix> {
        self.nodes[from].children.iter().find(|e| e.target == to).map(|e| &e.trace)
    }

    /// Formulas a trace may start from.
    pub fn start(&self) -> BTreeSet<usize> {
        self.nodes[self.root].label.iter().copied().collect()
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }
}

pub fn build_label_graph(f: &Formula) -> Result<LabelGraph> {
    build_label_graph_with(f, TableauOptions::default())
}

pub fn build_label_graph_with(f: &Formula, opts: TableauOptions) -> Result<LabelGraph> {
    ensure_well_formed(f)?;
    let omega = minimal_priority_assignment(f)?;
    let mut closure = Closure::new(f, &omega);
    let mut nodes: Vec<LabelNode> = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let root_label = vec![closure.root];
    index.insert(root_label.clone(), 0);
    nodes.push(placeholder(root_label));
    queue.push_back(0);

    while let Some(n) = queue.pop_front() {
        let label = nodes[n].label.clone();
        let (kind, rule, kids, literals) = expand(&mut closure, &label, opts);
        let mut children: Vec<LabelEdge> = Vec::new();
        for (child_label, trace) in kids {
            let target = match index.get(&child_label) {
                Some(&t) => t,
                None => {
                    if nodes.len() >= opts.node_cap {
                        return Err(Error::Budget(format!("label graph exceeds {} nodes", opts.node_cap)));
                    }
                    let t = nodes.len();
                    index.insert(child_label.clone(), t);
                    nodes.push(placeholder(child_label));
                    queue.push_back(t);
                    t
                }
            };
            // Children with equal labels are merged; their traces are united.
            match children.iter_mut().find(|e| e.target == target) {
                Some(e) => e.trace = e.trace.union(&trace),
                None => children.push(LabelEdge { target, trace }),
            }
        }
        let node = &mut nodes[n];
        node.kind = kind;
        node.rule = rule;
        node.children = children;
        node.literals = literals;
    }
    Ok(LabelGraph { closure, nodes, root: 0 })
}

fn placeholder(label: Vec<usize>) -> LabelNode {
    LabelNode { label, kind: NodeKind::Leaf, rule: None, children: Vec::new(), literals: BTreeSet::new() }
}

type Expansion = (NodeKind, Option<Rule>, Vec<(Vec<usize>, TraceMatrix)>, BTreeSet<Literal>);

fn expand(cl: &mut Closure, label: &[usize], opts: TableauOptions) -> Expansion {
    let literals: BTreeSet<Literal> = label.iter().filter_map(|&c| cl.literal(c)).collect();
    if !literals_consistent(&literals) {
        return (NodeKind::Leaf, None, Vec::new(), literals);
    }
    let pick = |pred: &dyn Fn(&CNode) -> bool| label.iter().copied().find(|&c| pred(cl.node(c)));
    let fix = pick(&|n| matches!(n, CNode::Fix { .. }));
    let var = pick(&|n| matches!(n, CNode::Var { .. }));
    let and = pick(&|n| matches!(n, CNode::And(..)));
    let or = pick(&|n| matches!(n, CNode::Or(..) | CNode::Join(..)));

    // Replaces `gamma` by `new` (each reached from `gamma` with weight `w`).
    let unary = |gamma: usize, new: &[usize], w: u32| {
        let mut out: BTreeSet<usize> = label.iter().copied().filter(|&c| c != gamma).collect();
        let mut m = TraceMatrix::identity(out.iter().copied());
        for &x in new {
            out.insert(x);
            m.insert(gamma, x, w);
        }
        (out.into_iter().collect::<Vec<_>>(), m)
    };

    if let Some(g) = fix {
        let CNode::Fix { body, .. } = *cl.node(g) else { unreachable!() };
        return (NodeKind::Unary, Some(Rule::Fix), vec![unary(g, &[body], 0)], BTreeSet::new());
    }
    if let Some(g) = var {
        let CNode::Var { binder, .. } = *cl.node(g) else { unreachable!() };
        let w = cl.weight(g);
        return (NodeKind::Unary, Some(Rule::Regen), vec![unary(g, &[binder], w)], BTreeSet::new());
    }
    let conj = |g: usize| {
        let CNode::And(a, b) = *cl.node(g) else { unreachable!() };
        (NodeKind::Unary, Some(Rule::And), vec![unary(g, &[a, b], 0)], BTreeSet::new())
    };
    let disj = |g: usize| {
        let parts = match cl.node(g) {
            CNode::Or(a, b) => vec![*a, *b],
            CNode::Join(ms) => ms.clone(),
            _ => unreachable!(),
        };
        let kids = parts.iter().map(|&p| unary(g, &[p], 0)).collect();
        (NodeKind::Choice, Some(Rule::Or), kids, BTreeSet::new())
    };
    match (and, or, opts.or_before_and) {
        (_, Some(o), true) => return disj(o),
        (Some(a), _, _) => return conj(a),
        (None, Some(o), false) => return disj(o),
        _ => {}
    }

    let modals: Vec<(usize, Vec<usize>)> = label
        .iter()
        .filter_map(|&c| match cl.node(c) {
            CNode::Modal(bs) => Some((c, bs.clone())),
            _ => None,
        })
        .collect();
    if modals.is_empty() {
        return (NodeKind::Leaf, None, Vec::new(), literals);
    }
    let joins: Vec<(usize, usize)> = modals.iter().map(|(c, bs)| (*c, cl.join(bs.clone()))).collect();
    let mut kids = Vec::new();
    for (m, bs) in &modals {
        for &psi in bs {
            let mut child = BTreeSet::from([psi]);
            let mut trace = TraceMatrix::single(*m, psi, 0);
            for &(other, j) in &joins {
                if other != *m {
                    child.insert(j);
                    trace.insert(other, j, 0);
                }
            }
            kids.push((child.into_iter().collect(), trace));
        }
    }
    (NodeKind::Modal, Some(Rule::Modal), kids, literals)
}

/// Whether the lasso `u.v^omega` carries a trace whose eventual maximal
/// regeneration weight is odd. `u` starts at the root (it may be empty, in
/// which case `v` must start there); `v` is a cycle whose last node has an
/// edge back to its first.
pub fn lasso_has_mu_trace(g: &LabelGraph, u: &[usize], v: &[usize]) -> Result<bool> {
    let (entry, cycle) = lasso_matrices(g, u, v)?;
    let start = entry.image(&g.start());
    Ok(cycle.has_mu_trace(&start))
}

fn path_matrix(g: &LabelGraph, path: &[usize], universe: &[usize]) -> Result<TraceMatrix> {
    let mut m = TraceMatrix::identity(universe.iter().copied());
    for w in path.windows(2) {
        let e = g
            .edge(w[0], w[1])
            .ok_or_else(|| Error::PathNotInGraph(format!("no edge {} -> {}", w[0], w[1])))?;
        m = m.compose(e);
    }
    Ok(m)
}

pub(crate) fn lasso_matrices(g: &LabelGraph, u: &[usize], v: &[usize]) -> Result<(TraceMatrix, TraceMatrix)> {
    let Some(&v0) = v.first() else {
        return Err(Error::PathNotInGraph("empty cycle".into()));
    };
    if v.iter().chain(u).any(|&n| n >= g.len()) {
        return Err(Error::PathNotInGraph("unknown node".into()));
    }
    let mut stem: Vec<usize> = u.to_vec();
    stem.push(v0);
    if stem[0] != g.root {
        return Err(Error::PathNotInGraph("lasso does not start at the root".into()));
    }
    let entry = path_matrix(g, &stem, &g.nodes[g.root].label)?;
    let mut around: Vec<usize> = v.to_vec();
    around.push(v0);
    let cycle = path_matrix(g, &around, &g.nodes[v0].label)?;
    Ok((entry, cycle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;

    #[test]
    fn single_literal_is_a_leaf() {
        let g = build_label_graph(&parse_formula("a").unwrap()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.nodes[0].kind, NodeKind::Leaf);
        assert_eq!(g.nodes[0].literals, BTreeSet::from([Literal::Pos("a".into())]));
    }

    #[test]
    fn simple_plain_formula_skeleton() {
        let f = parse_formula("nu Y. ->{Y} & mu X. (~a & ->{X}) | a").unwrap();
        let g = build_label_graph(&f).unwrap();
        assert_eq!(g.count(NodeKind::Modal), 2);
        let choices: Vec<&LabelNode> =
            g.nodes.iter().filter(|n| n.kind == NodeKind::Choice && n.children.len() >= 2).collect();
        assert_eq!(choices.len(), 1);
        let lits: BTreeSet<BTreeSet<Literal>> =
            g.nodes.iter().filter(|n| n.kind == NodeKind::Modal).map(|n| n.literals.clone()).collect();
        assert!(lits.contains(&BTreeSet::from([Literal::Neg("a".into())])));
        assert!(lits.contains(&BTreeSet::from([Literal::Pos("a".into())])));
    }

    #[test]
    fn inconsistent_labels_stop() {
        let g = build_label_graph(&parse_formula("a & ~a & ->{tt}").unwrap()).unwrap();
        let last = g.nodes.iter().find(|n| n.children.is_empty()).unwrap();
        assert_eq!(last.kind, NodeKind::Leaf);
        assert!(!literals_consistent(&last.literals));
    }

    #[test]
    fn node_cap_is_enforced() {
        let f = parse_formula("nu Y. ->{Y} & mu X. (~a & ->{X}) | a").unwrap();
        let opts = TableauOptions { node_cap: 3, ..Default::default() };
        assert!(matches!(build_label_graph_with(&f, opts), Err(Error::Budget(_))));
    }
}
