//! Disjunctive formulas and their trees with back edges, in both directions.

use std::collections::{BTreeMap, BTreeSet};

use crate::core_graph::core_of_twb;
use crate::error::{Error, Result};
use crate::formula::{ensure_well_formed, literals_consistent, minimal_priority_assignment, FixKind, Formula, Literal};
use crate::game::{solve, Arena, Player};
use crate::twb::{TreeWithBackEdges, TwbKind, TwbNode};

/// Splits a conjunction into its conjuncts.
fn conjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        _ => out.push(f),
    }
}

fn disjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::Or(a, b) => {
            disjuncts(a, out);
            disjuncts(b, out);
        }
        _ => out.push(f),
    }
}

fn is_atom(f: &Formula) -> bool {
    matches!(f, Formula::Top | Formula::Bottom | Formula::Prop(_) | Formula::NegProp(_))
}

/// Literals, disjunctions, fixpoints, and conjunctions of literals with at
/// most one `->B` whose members are again disjunctive.
pub fn is_disjunctive(f: &Formula) -> bool {
    match f {
        Formula::Top | Formula::Bottom | Formula::Prop(_) | Formula::NegProp(_) | Formula::Var(_) => true,
        Formula::Or(a, b) => is_disjunctive(a) && is_disjunctive(b),
        Formula::Mu(_, b) | Formula::Nu(_, b) => is_disjunctive(b),
        Formula::Modal(bs) => bs.iter().all(is_disjunctive),
        Formula::And(..) => {
            let mut parts = Vec::new();
            conjuncts(f, &mut parts);
            let modals: Vec<&&Formula> = parts.iter().filter(|p| matches!(p, Formula::Modal(_))).collect();
            modals.len() <= 1
                && parts.iter().all(|p| is_atom(p) || matches!(p, Formula::Modal(_)))
                && modals.iter().all(|m| is_disjunctive(m))
        }
    }
}

fn literal_of(f: &Formula) -> Option<Literal> {
    match f {
        Formula::Prop(p) => Some(Literal::Pos(p.clone())),
        Formula::NegProp(p) => Some(Literal::Neg(p.clone())),
        Formula::Bottom => Some(Literal::False),
        _ => None,
    }
}

struct TreeBuilder<'a> {
    nodes: Vec<TwbNode>,
    omega: &'a BTreeMap<String, u32>,
    binders: Vec<(String, usize)>,
    used: BTreeSet<usize>,
}

impl TreeBuilder<'_> {
    fn push(&mut self, n: TwbNode) -> usize {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    fn build(&mut self, f: &Formula) -> usize {
        match f {
            Formula::Var(x) => {
                let (_, target) = self.binders.iter().rev().find(|(y, _)| y == x).cloned().expect("closed formula");
                self.used.insert(target);
                self.push(TwbNode::jump(target))
            }
            Formula::Mu(x, b) | Formula::Nu(x, b) => {
                let id = self.push(TwbNode::choice(Vec::new()));
                self.binders.push((x.clone(), id));
                let child = self.build(b);
                self.binders.pop();
                self.nodes[id].children = vec![child];
                self.nodes[id].priority = self.omega.get(x).copied().unwrap_or(0);
                id
            }
            Formula::Or(..) => {
                let id = self.push(TwbNode::choice(Vec::new()));
                let mut parts = Vec::new();
                disjuncts(f, &mut parts);
                let kids = parts.into_iter().map(|p| self.build(p)).collect();
                self.nodes[id].children = kids;
                id
            }
            _ => {
                let mut parts = Vec::new();
                conjuncts(f, &mut parts);
                let lits: BTreeSet<Literal> = parts.iter().filter_map(|p| literal_of(p)).collect();
                match parts.iter().find_map(|p| match p {
                    Formula::Modal(bs) => Some(bs),
                    _ => None,
                }) {
                    Some(bs) => {
                        let id = self.push(TwbNode::modal(lits, Vec::new()));
                        let kids = bs.iter().map(|m| self.build(m)).collect();
                        self.nodes[id].children = kids;
                        id
                    }
                    None => self.push(TwbNode::leaf(lits)),
                }
            }
        }
    }
}

/// The tree with back edges of a disjunctive formula. Every binder becomes a
/// pass-through node carrying its priority (0 if its variable is unused);
/// every variable becomes a back edge to its binder's node.
pub fn disjunctive_to_tree(f: &Formula) -> Result<TreeWithBackEdges> {
    ensure_well_formed(f)?;
    if !is_disjunctive(f) {
        return Err(Error::NotDisjunctive);
    }
    let omega = minimal_priority_assignment(f)?;
    let mut b = TreeBuilder { nodes: Vec::new(), omega: &omega.entries, binders: Vec::new(), used: BTreeSet::new() };
    let root = b.build(f);
    for (i, n) in b.nodes.iter_mut().enumerate() {
        if n.kind == TwbKind::Choice && n.children.len() == 1 && !b.used.contains(&i) {
            n.priority = 0;
        }
    }
    TreeWithBackEdges::new(b.nodes, root)
}

struct Reorder<'a> {
    t: &'a TreeWithBackEdges,
    /// Bisimulation class of every node, jumps standing for their targets.
    class: Vec<usize>,
    /// Classes a branch may close on: those of back-edge targets and of nodes
    /// with a priority. Other nodes are copied wherever they are reached.
    var: Vec<bool>,
    nodes: Vec<TwbNode>,
    cap: usize,
}

impl Reorder<'_> {
    fn add(&mut self, n: TwbNode) -> Result<usize> {
        if self.nodes.len() >= self.cap {
            return Err(Error::Budget(format!("reordering exceeds {} nodes", self.cap)));
        }
        self.nodes.push(n);
        Ok(self.nodes.len() - 1)
    }

    /// Copy of `v` in the unfolding, or a back edge to an open copy of it.
    /// `open` lists `(node, copy)` along the current path from the root.
    fn visit(&mut self, v: usize, open: &mut Vec<(usize, usize)>) -> Result<usize> {
        let t = self.t;
        if let Some(target) = t.nodes[v].back {
            return self.visit(target, open);
        }
        if self.var[self.class[v]] {
            let p = t.nodes[v].priority;
            for &(w, copy) in open.iter().rev() {
                if self.class[w] == self.class[v] {
                    return self.add(TwbNode::jump(copy));
                }
                if t.nodes[w].priority > p {
                    break;
                }
            }
        }
        let mut node = t.nodes[v].clone();
        node.children = Vec::new();
        let id = self.add(node)?;
        open.push((v, id));
        let mut kids = Vec::with_capacity(t.nodes[v].children.len());
        for &c in &t.nodes[v].children {
            kids.push(self.visit(c, open)?);
        }
        open.pop();
        self.nodes[id].children = kids;
        Ok(id)
    }
}

/// Coarsest bisimulation on the graph of `t` that respects kind, literals and
/// priority. A jump gets the class of its target.
fn twb_bisimulation(t: &TreeWithBackEdges) -> Vec<usize> {
    let resolve = |v: usize| t.nodes[v].back.unwrap_or(v);
    let mut init: BTreeMap<(TwbKind, &BTreeSet<Literal>, u32), usize> = BTreeMap::new();
    let mut class: Vec<usize> = (0..t.len())
        .map(|v| {
            let n = &t.nodes[resolve(v)];
            let next = init.len();
            *init.entry((n.kind, &n.literals, n.priority)).or_insert(next)
        })
        .collect();
    loop {
        let mut sigs: BTreeMap<(usize, BTreeSet<usize>), usize> = BTreeMap::new();
        let mut next = vec![0; t.len()];
        for v in (0..t.len()).filter(|&v| t.nodes[v].back.is_none()) {
            let succ = t.nodes[v].children.iter().map(|&c| class[c]).collect();
            let fresh = sigs.len();
            next[v] = *sigs.entry((class[v], succ)).or_insert(fresh);
        }
        for v in 0..t.len() {
            next[v] = next[resolve(v)];
        }
        let stable = sigs.len() == class.iter().collect::<BTreeSet<_>>().len();
        class = next;
        if stable {
            return class;
        }
    }
}

/// A tree with the same unfolding and cycle parities in which every back
/// edge's target carries the largest priority on the tree path down to the
/// edge's source.
///
/// Every class of bisimilar nodes holding a priority or a back-edge target
/// acts as a fixpoint variable of that priority. The unfolding is walked from
/// the root; on reaching such a node, the branch closes on the deepest open
/// copy of its class when no higher priority has been opened since, and unfolds a fresh copy
/// otherwise. Each cycle of the result thus visits exactly the copies opened
/// below its target, so its highest priority is the target's and matches
/// the walk it stands for. Along any path, each priority level holds each
/// class at most once between two higher entries, which bounds the depth.
pub fn reorder_decreasing(t: &TreeWithBackEdges) -> Result<TreeWithBackEdges> {
    t.validate()?;
    let class = twb_bisimulation(t);
    let mut var = vec![false; t.len()];
    for &v in &t.back_targets() {
        var[class[v]] = true;
    }
    for (v, n) in t.nodes.iter().enumerate() {
        var[class[v]] |= n.priority > 0;
    }
    let mut r = Reorder { t, class, var, nodes: Vec::new(), cap: 1_000_000 };
    let root = r.visit(t.root, &mut Vec::new())?;
    let used: BTreeSet<usize> = r.nodes.iter().filter_map(|n| n.back).collect();
    for (i, n) in r.nodes.iter_mut().enumerate() {
        if !used.contains(&i) {
            n.priority = 0;
        }
    }
    let out = TreeWithBackEdges { nodes: r.nodes, root }.contract_pass_through();
    debug_assert!(out.is_ordered());
    Ok(out)
}

/// The formula of an ordered tree: leaves are literal conjunctions, choice
/// nodes disjunctions, modal nodes `literals & ->{children}`, back-edge
/// sources variables, and back-edge targets bind their variable with `nu`
/// (even priority) or `mu` (odd priority).
pub fn tree_to_disjunctive(t: &TreeWithBackEdges) -> Result<Formula> {
    t.validate()?;
    if let Some(v) = t.ordering_violation() {
        return Err(Error::Ordering(v));
    }
    core_of_twb(t)?;
    let targets = t.back_targets();
    Ok(formula_of(t, t.root, &targets))
}

fn var_name(n: usize) -> String {
    format!("X{n}")
}

fn formula_of(t: &TreeWithBackEdges, n: usize, targets: &BTreeSet<usize>) -> Formula {
    let node = &t.nodes[n];
    let lits = || node.literals.iter().map(|l| l.to_formula());
    let body = match node.kind {
        TwbKind::Jump => Formula::var(&var_name(node.back.expect("jump target"))),
        TwbKind::Leaf => {
            if node.literals.is_empty() {
                Formula::Top
            } else {
                Formula::conj(lits())
            }
        }
        TwbKind::Choice => {
            let mut kids: Vec<Formula> = node.children.iter().map(|&c| formula_of(t, c, targets)).collect();
            kids.sort();
            kids.dedup();
            kids.into_iter().rev().reduce(|acc, k| Formula::or(k, acc)).unwrap_or(Formula::Bottom)
        }
        TwbKind::Modal => {
            let modal = Formula::modal(node.children.iter().map(|&c| formula_of(t, c, targets)));
            Formula::conj(lits().chain([modal]))
        }
    };
    if targets.contains(&n) {
        Formula::fix(FixKind::for_priority(node.priority), &var_name(n), body)
    } else {
        body
    }
}

/// Satisfiability of a disjunctive formula: Even resolves choices, Odd picks
/// a member at modal nodes, and infinite plays are judged by node priorities.
pub fn disjunctive_sat(f: &Formula) -> Result<bool> {
    let t = disjunctive_to_tree(f)?;
    Ok(tree_sat(&t))
}

pub fn tree_sat(t: &TreeWithBackEdges) -> bool {
    let mut a = Arena::default();
    for (i, n) in t.nodes.iter().enumerate() {
        let consistent = literals_consistent(&n.literals);
        let (owner, prio) = match n.kind {
            TwbKind::Modal if !consistent => (Player::Odd, 1),
            TwbKind::Modal if n.children.is_empty() => (Player::Odd, 0),
            TwbKind::Modal => (Player::Odd, n.priority),
            TwbKind::Leaf => (Player::Even, u32::from(!consistent)),
            // An empty choice is `ff`.
            TwbKind::Choice if n.children.is_empty() => (Player::Even, 1),
            TwbKind::Choice | TwbKind::Jump => (Player::Even, n.priority),
        };
        a.add(owner, prio, format!("n{i}"));
    }
    for (i, n) in t.nodes.iter().enumerate() {
        if n.kind == TwbKind::Modal && !literals_consistent(&n.literals) {
            continue;
        }
        for s in t.successors(i) {
            a.add_move(i, s);
        }
    }
    a.initial = t.root;
    solve(&a).win_even.contains(&t.root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{gen_beta, gen_simple_pair};
    use crate::parse::parse_formula;
    use crate::twb::parse_twb;

    fn pf(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn recognizer() {
        let (d, p) = gen_simple_pair();
        assert!(is_disjunctive(&d));
        assert!(!is_disjunctive(&p));
        assert!(is_disjunctive(&gen_beta()));
        assert!(is_disjunctive(&pf("a & ~b")));
        assert!(!is_disjunctive(&pf("->{a} & ->{b}")));
        assert!(!is_disjunctive(&pf("a & (b | c)")));
    }

    #[test]
    fn single_loop_tree() {
        let t = disjunctive_to_tree(&pf("mu X. ->{X}")).unwrap();
        let targets = t.back_targets();
        assert_eq!(targets.len(), 1);
        let target = *targets.iter().next().unwrap();
        assert_eq!(t.nodes[target].priority, 1);
        assert_eq!(t.nodes.iter().filter(|n| n.kind == TwbKind::Modal).count(), 1);
        assert!(matches!(disjunctive_to_tree(&gen_simple_pair().1), Err(Error::NotDisjunctive)));
    }

    #[test]
    fn beta_tree() {
        let t = disjunctive_to_tree(&gen_beta()).unwrap();
        assert_eq!(t.nodes.iter().filter(|n| n.kind == TwbKind::Modal).count(), 6);
        let prios: BTreeSet<u32> = t.back_targets().iter().map(|&n| t.nodes[n].priority).collect();
        assert_eq!(prios, BTreeSet::from([0, 1, 2, 3]));
        assert!(t.is_ordered());
    }

    #[test]
    fn leaf_formula() {
        let t = parse_twb("root m\nnode m kind=modal lits=a prio=0 children=l\nnode l kind=leaf lits=b prio=0\n").unwrap();
        assert_eq!(tree_to_disjunctive(&t).unwrap().to_string(), "a & ->{b}");
    }

    #[test]
    fn reorder_smallest_violation() {
        let t = parse_twb(
            "root n0\nnode n0 kind=or prio=1 children=n1\nnode n1 kind=modal prio=2 children=n2,n3\nnode n2 back=n0\nnode n3 back=n1\n",
        )
        .unwrap();
        assert!(!t.is_ordered());
        assert!(matches!(tree_to_disjunctive(&t), Err(Error::Ordering(_))));
        let r = reorder_decreasing(&t).unwrap();
        assert!(r.is_ordered());
        let outer = r.back_targets().into_iter().min().unwrap();
        assert_eq!(r.nodes[outer].priority, 2);
        assert_eq!(reorder_decreasing(&r).unwrap(), r);
    }

    #[test]
    fn ordered_input_is_kept() {
        let t = disjunctive_to_tree(&gen_beta()).unwrap();
        assert_eq!(reorder_decreasing(&t).unwrap(), t.canonical());
    }

    #[test]
    fn satisfiability() {
        assert!(disjunctive_sat(&pf("a")).unwrap());
        assert!(!disjunctive_sat(&pf("a & ~a & ->{tt}")).unwrap());
        assert!(!disjunctive_sat(&pf("mu X. a & ->{X}")).unwrap());
        assert!(disjunctive_sat(&pf("nu X. a & ->{X}")).unwrap());
        assert!(disjunctive_sat(&pf("mu X. (a & ->{X}) | b")).unwrap());
        assert!(disjunctive_sat(&pf("->{}")).unwrap());
    }
}
