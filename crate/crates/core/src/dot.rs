//! Graphviz export. Node ids are emitted in ascending order and edges in
//! source order, so the output is byte-stable.

use std::fmt::Write;

use crate::core_graph::{CoreGraph, CoreKind};
use crate::formula::Literal;
use crate::kripke::KripkeStructure;
use crate::tableau::{LabelGraph, NodeKind};
use crate::twb::{TreeWithBackEdges, TwbKind};

pub trait ToDot {
    fn to_dot(&self) -> String;
}

pub fn export_dot<T: ToDot + ?Sized>(g: &T) -> String {
    g.to_dot()
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn literals<'a>(lits: impl IntoIterator<Item = &'a Literal>) -> String {
    lits.into_iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

fn shape(modal: bool, leaf: bool) -> &'static str {
    if leaf {
        "box"
    } else if modal {
        "doublecircle"
    } else {
        "circle"
    }
}

impl ToDot for TreeWithBackEdges {
    /// Jump nodes are not drawn; their back edge leaves the jump's parent
    /// dashed, so each remaining node is a branching point of the tree.
    fn to_dot(&self) -> String {
        let parents = self.parents();
        let mut out = String::from("digraph twb {\n  node [fontname=\"monospace\"];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            if n.kind == TwbKind::Jump {
                continue;
            }
            let mut label = format!("n{i}");
            if n.priority > 0 {
                write!(label, " : {}", n.priority).unwrap();
            }
            if !n.literals.is_empty() {
                write!(label, "\\n{}", escape(&literals(&n.literals))).unwrap();
            }
            let leaf = n.kind == TwbKind::Leaf;
            writeln!(out, "  n{i} [label=\"{label}\", shape={}];", shape(n.kind == TwbKind::Modal, leaf)).unwrap();
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.kind == TwbKind::Jump {
                continue;
            }
            for &c in &n.children {
                match self.nodes[c].back {
                    Some(t) => writeln!(out, "  n{i} -> n{t} [style=dashed];").unwrap(),
                    None => writeln!(out, "  n{i} -> n{c};").unwrap(),
                }
            }
        }
        // A jump at the root has no parent to hang its edge from.
        if let Some(t) = self.nodes[self.root].back.filter(|_| parents[self.root].is_none()) {
            writeln!(out, "  n{t} -> n{t} [style=dashed];").unwrap();
        }
        out.push_str("}\n");
        out
    }
}

impl ToDot for LabelGraph {
    fn to_dot(&self) -> String {
        let mut out = String::from("digraph tableau {\n  node [fontname=\"monospace\"];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let label: Vec<String> = n.label.iter().map(|&f| escape(self.closure.text(f))).collect();
            let root = if i == self.root { ", penwidth=2" } else { "" };
            writeln!(
                out,
                "  n{i} [label=\"{i}: {{{}}}\", shape={}{root}];",
                label.join(", "),
                shape(n.kind == NodeKind::Modal, n.kind == NodeKind::Leaf)
            )
            .unwrap();
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for e in &n.children {
                writeln!(out, "  n{i} -> n{};", e.target).unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

impl ToDot for CoreGraph {
    fn to_dot(&self) -> String {
        let mut out = String::from("digraph core {\n  node [fontname=\"monospace\"];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let mut label = escape(&n.name);
            if !n.literals.is_empty() {
                write!(label, "\\n{}", escape(&literals(&n.literals))).unwrap();
            }
            let root = if i == self.root { ", penwidth=2" } else { "" };
            writeln!(
                out,
                "  n{i} [label=\"{label}\", shape={}{root}];",
                shape(n.kind == CoreKind::Modal, n.kind == CoreKind::Leaf)
            )
            .unwrap();
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for e in &n.edges {
                writeln!(out, "  n{i} -> n{};", e.target).unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

impl ToDot for KripkeStructure {
    fn to_dot(&self) -> String {
        let mut out = String::from("digraph kripke {\n");
        for (i, name) in self.names.iter().enumerate() {
            let props: Vec<&str> = self.props[i].iter().map(String::as_str).collect();
            let init = if i == self.init { ", penwidth=2" } else { "" };
            writeln!(out, "  s{i} [label=\"{}\\n{}\"{init}];", escape(name), escape(&props.join(" "))).unwrap();
        }
        for (i, succ) in self.succ.iter().enumerate() {
            for &j in succ {
                writeln!(out, "  s{i} -> s{j};").unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::gen_beta;
    use crate::disjunctive::disjunctive_to_tree;
    use crate::kripke::parse_structure;

    #[test]
    fn beta_tree_matches_golden() {
        let t = disjunctive_to_tree(&gen_beta()).unwrap();
        let dot = t.to_dot();
        let golden = include_str!("../tests/golden/beta.dot");
        assert_eq!(dot, golden);
        let drawn = dot.lines().filter(|l| l.contains("[label=")).count();
        let branching = t.nodes.iter().filter(|n| n.kind != TwbKind::Jump).count();
        assert_eq!(drawn, branching);
    }

    #[test]
    fn kripke_export_is_stable() {
        let m = parse_structure("state s0 p\nstate s1\ninit s0\nedge s0 s1\nedge s1 s0\n").unwrap();
        assert_eq!(m.to_dot(), export_dot(&m));
        assert!(m.to_dot().contains("s0 -> s1;"));
    }
}
