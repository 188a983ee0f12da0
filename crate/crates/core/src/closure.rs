//! Interned subformulas of a closed formula, extended on demand with the
//! `\/B` helpers introduced by the modal rule.

use std::collections::{BTreeMap, HashMap};

use crate::formula::{FixKind, Formula, Literal, PriorityAssignment};

/// One interned formula. Children are closure ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CNode {
    Top,
    Bottom,
    Lit(Literal),
    Var { name: String, binder: usize },
    And(usize, usize),
    Or(usize, usize),
    Modal(Vec<usize>),
    Fix { kind: FixKind, name: String, body: usize },
    /// `\/B` for `|B| >= 2`.
    Join(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    Formula(Formula),
    Join(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct Closure {
    nodes: Vec<CNode>,
    text: Vec<String>,
    index: HashMap<Key, usize>,
    pub root: usize,
    pub bottom: usize,
    omega: BTreeMap<String, u32>,
}

impl Closure {
    /// Interns every subformula of `f`; ids follow the structural order of
    /// formulas, so "least id" means "structurally least". `f` must be
    /// closed with unique binder names.
    pub fn new(f: &Formula, omega: &PriorityAssignment) -> Closure {
        let mut subs = Vec::new();
        collect(f, &mut subs);
        subs.push(Formula::Bottom);
        subs.sort();
        subs.dedup();
        let index: HashMap<Key, usize> =
            subs.iter().enumerate().map(|(i, s)| (Key::Formula(s.clone()), i)).collect();
        let binder_of: HashMap<&str, usize> = subs
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.binder().map(|(_, x, _)| (x, i)))
            .collect();
        let id = |g: &Formula| index[&Key::Formula(g.clone())];
        let nodes = subs
            .iter()
            .map(|s| match s {
                Formula::Top => CNode::Top,
                Formula::Bottom => CNode::Bottom,
                Formula::Prop(p) => CNode::Lit(Literal::Pos(p.clone())),
                Formula::NegProp(p) => CNode::Lit(Literal::Neg(p.clone())),
                Formula::Var(x) => CNode::Var { name: x.clone(), binder: binder_of[x.as_str()] },
                Formula::And(a, b) => CNode::And(id(a), id(b)),
                Formula::Or(a, b) => CNode::Or(id(a), id(b)),
                Formula::Modal(bs) => CNode::Modal(bs.iter().map(id).collect()),
                Formula::Mu(x, b) => CNode::Fix { kind: FixKind::Mu, name: x.clone(), body: id(b) },
                Formula::Nu(x, b) => CNode::Fix { kind: FixKind::Nu, name: x.clone(), body: id(b) },
            })
            .collect();
        let text = subs.iter().map(|s| s.to_string()).collect();
        Closure {
            nodes,
            text,
            root: id(f),
            bottom: id(&Formula::Bottom),
            index,
            omega: omega.entries.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: usize) -> &CNode {
        &self.nodes[id]
    }

    pub fn text(&self, id: usize) -> &str {
        &self.text[id]
    }

    pub fn lookup(&self, f: &Formula) -> Option<usize> {
        self.index.get(&Key::Formula(f.clone())).copied()
    }

    /// `\/B` with `\/{psi} = psi` and `\/{} = ff`.
    pub fn join(&mut self, mut members: Vec<usize>) -> usize {
        members.sort_unstable();
        members.dedup();
        match members.len() {
            0 => self.bottom,
            1 => members[0],
            _ => {
                let key = Key::Join(members.clone());
                if let Some(&i) = self.index.get(&key) {
                    return i;
                }
                let i = self.nodes.len();
                let parts: Vec<&str> = members.iter().map(|&m| self.text[m].as_str()).collect();
                self.text.push(format!("\\/{{{}}}", parts.join(", ")));
                self.nodes.push(CNode::Join(members));
                self.index.insert(key, i);
                i
            }
        }
    }

    /// Regeneration weight: the priority of a variable, 0 for anything else.
    pub fn weight(&self, id: usize) -> u32 {
        match &self.nodes[id] {
            CNode::Var { name, .. } => self.omega.get(name).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn max_weight(&self) -> u32 {
        self.omega.values().copied().max().unwrap_or(0)
    }

    pub fn omega(&self) -> &BTreeMap<String, u32> {
        &self.omega
    }

    /// The literal a label member contributes to a modal node or leaf.
    pub fn literal(&self, id: usize) -> Option<Literal> {
        match &self.nodes[id] {
            CNode::Lit(l) => Some(l.clone()),
            CNode::Bottom => Some(Literal::False),
            _ => None,
        }
    }
}

fn collect(f: &Formula, out: &mut Vec<Formula>) {
    out.push(f.clone());
    for c in f.children() {
        collect(c, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::minimal_priority_assignment;
    use crate::parse::parse_formula;

    #[test]
    fn interning_and_joins() {
        let f = parse_formula("mu X. a & ->{X, b}").unwrap();
        let omega = minimal_priority_assignment(&f).unwrap();
        let mut c = Closure::new(&f, &omega);
        let x = c.lookup(&Formula::var("X")).unwrap();
        let b = c.lookup(&Formula::prop("b")).unwrap();
        assert_eq!(c.weight(x), 1);
        assert!(matches!(c.node(x), CNode::Var { binder, .. } if *binder == c.root));
        let j = c.join(vec![b, x]);
        assert_eq!(c.join(vec![x, b]), j);
        assert_eq!(c.join(vec![b]), b);
        assert_eq!(c.join(vec![]), c.bottom);
        assert_eq!(c.literal(c.bottom), Some(Literal::False));
        assert!(c.text(j).starts_with("\\/{"));
    }
}
