//! Finite trees with back edges, the finite representation of a tableau core.
//!
//! Text format (`.twb`), one directive per line:
//!
//! ```text
//! root n0
//! node n0 kind=modal lits=a,~b prio=1 children=n1
//! node n1 back=n0
//! ```
//!
//! `kind` is one of `modal`, `or`, `leaf`; a node with `back=` is a back-edge
//! source and carries no kind and no children. An `or` node with a single
//! child is a pass-through node.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{literals_consistent, Literal};
use crate::parse::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TwbKind {
    Modal,
    Choice,
    Leaf,
    /// Source of a back edge.
    Jump,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwbNode {
    pub kind: TwbKind,
    pub literals: BTreeSet<Literal>,
    pub priority: u32,
    pub children: Vec<usize>,
    pub back: Option<usize>,
}

impl TwbNode {
    pub fn modal(literals: BTreeSet<Literal>, children: Vec<usize>) -> Self {
        TwbNode { kind: TwbKind::Modal, literals, priority: 0, children, back: None }
    }

    pub fn choice(children: Vec<usize>) -> Self {
        TwbNode { kind: TwbKind::Choice, literals: BTreeSet::new(), priority: 0, children, back: None }
    }

    pub fn leaf(literals: BTreeSet<Literal>) -> Self {
        TwbNode { kind: TwbKind::Leaf, literals, priority: 0, children: Vec::new(), back: None }
    }

    pub fn jump(target: usize) -> Self {
        TwbNode { kind: TwbKind::Jump, literals: BTreeSet::new(), priority: 0, children: Vec::new(), back: Some(target) }
    }

    pub fn with_priority(mut self, p: u32) -> Self {
        self.priority = p;
        self
    }

    pub fn is_consistent(&self) -> bool {
        literals_consistent(&self.literals)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeWithBackEdges {
    pub nodes: Vec<TwbNode>,
    pub root: usize,
}

impl TreeWithBackEdges {
    pub fn new(nodes: Vec<TwbNode>, root: usize) -> Result<Self> {
        let t = TreeWithBackEdges { nodes, root };
        t.validate()?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Tree parent of every node (`None` for the root and unreachable nodes).
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for &c in &n.children {
                parent[c] = Some(i);
            }
        }
        parent
    }

    /// Successors in the graph view: tree children, or the back-edge target.
    pub fn successors(&self, n: usize) -> Vec<usize> {
        match self.nodes[n].back {
            Some(t) => vec![t],
            None => self.nodes[n].children.clone(),
        }
    }

    pub fn graph(&self) -> Vec<Vec<usize>> {
        (0..self.nodes.len()).map(|n| self.successors(n)).collect()
    }

    pub fn priorities(&self) -> Vec<u32> {
        self.nodes.iter().map(|n| n.priority).collect()
    }

    pub fn max_priority(&self) -> u32 {
        self.nodes.iter().map(|n| n.priority).max().unwrap_or(0)
    }

    pub fn back_targets(&self) -> BTreeSet<usize> {
        self.nodes.iter().filter_map(|n| n.back).collect()
    }

    /// Largest priority carried by a back-edge target (0 without back edges).
    pub fn max_target_priority(&self) -> u32 {
        self.back_targets().iter().map(|&t| self.nodes[t].priority).max().unwrap_or(0)
    }

    /// Tree path from `top` down to `bottom`, both included. `top` must be an
    /// ancestor of `bottom`.
    pub fn tree_path(&self, top: usize, bottom: usize) -> Vec<usize> {
        let parent = self.parents();
        let mut path = vec![bottom];
        let mut cur = bottom;
        while cur != top {
            cur = parent[cur].expect("top is an ancestor of bottom");
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Checks the tree shape and that back edges point to strict ancestors.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        let bad = |m: String| Err(Error::MalformedTree(m));
        if self.root >= n {
            return bad("root out of range".into());
        }
        let mut parent: Vec<Option<usize>> = vec![None; n];
        for (i, node) in self.nodes.iter().enumerate() {
            match (node.kind, node.back) {
                (TwbKind::Jump, Some(t)) if t >= n => return bad(format!("node {i}: back edge to unknown node {t}")),
                (TwbKind::Jump, Some(_)) if !node.children.is_empty() => {
                    return bad(format!("node {i}: back-edge source has children"))
                }
                (TwbKind::Jump, None) => return bad(format!("node {i}: jump without target")),
                (k, Some(_)) if k != TwbKind::Jump => return bad(format!("node {i}: back edge on a {k:?} node")),
                (TwbKind::Leaf, _) if !node.children.is_empty() => return bad(format!("node {i}: leaf with children")),
                _ => {}
            }
            for &c in &node.children {
                if c >= n {
                    return bad(format!("node {i}: unknown child {c}"));
                }
                if c == self.root || parent[c].is_some() {
                    return bad(format!("node {c} has more than one parent"));
                }
                parent[c] = Some(i);
            }
        }
        // Reachability from the root along tree edges.
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            seen[v] = true;
            stack.extend(self.nodes[v].children.iter().copied());
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return bad(format!("node {i} is not reachable from the root"));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some(t) = node.back {
                let mut cur = parent[i];
                let mut ok = false;
                while let Some(a) = cur {
                    if a == t {
                        ok = true;
                        break;
                    }
                    cur = parent[a];
                }
                if !ok {
                    return bad(format!("back edge from node {i} to non-ancestor {t}"));
                }
            }
        }
        Ok(())
    }

    /// For every back edge, no node on the tree path from its target to its
    /// source has a priority above the target's. Under this condition the
    /// target priorities alone decide the parity of every cycle and can be
    /// used as fixpoint priorities.
    pub fn is_ordered(&self) -> bool {
        self.ordering_violation().is_none()
    }

    pub(crate) fn ordering_violation(&self) -> Option<String> {
        for (j, node) in self.nodes.iter().enumerate() {
            if let Some(t) = node.back {
                let p = self.nodes[t].priority;
                if let Some(&v) = self.tree_path(t, j).iter().find(|&&v| self.nodes[v].priority > p) {
                    return Some(format!(
                        "node {v} (priority {}) lies on the cycle of back edge {j} -> {t} (priority {p})",
                        self.nodes[v].priority
                    ));
                }
            }
        }
        None
    }

    /// Renumbers nodes in preorder from the root.
    pub fn canonical(&self) -> TreeWithBackEdges {
        let mut order = Vec::new();
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            for &c in self.nodes[v].children.iter().rev() {
                stack.push(c);
            }
        }
        let mut new_id = vec![usize::MAX; self.nodes.len()];
        for (i, &v) in order.iter().enumerate() {
            new_id[v] = i;
        }
        let nodes = order
            .iter()
            .map(|&v| {
                let n = &self.nodes[v];
                TwbNode {
                    kind: n.kind,
                    literals: n.literals.clone(),
                    priority: n.priority,
                    children: n.children.iter().map(|&c| new_id[c]).collect(),
                    back: n.back.map(|t| new_id[t]),
                }
            })
            .collect();
        TreeWithBackEdges { nodes, root: 0 }
    }

    /// Replaces pass-through nodes (single-child `or` nodes) that are not
    /// back-edge targets by their child, and drops their priority. Only valid
    /// when such nodes carry no significant priority (e.g. in an ordered tree).
    pub fn contract_pass_through(&self) -> TreeWithBackEdges {
        let targets = self.back_targets();
        let skip = |v: usize| {
            let n = &self.nodes[v];
            n.kind == TwbKind::Choice && n.children.len() == 1 && !targets.contains(&v)
        };
        let resolve = |mut v: usize| {
            while skip(v) {
                v = self.nodes[v].children[0];
            }
            v
        };
        let mut nodes = self.nodes.clone();
        for n in &mut nodes {
            for c in &mut n.children {
                *c = resolve(*c);
            }
        }
        TreeWithBackEdges { nodes, root: resolve(self.root) }.canonical()
    }
    /// Merges nodes with the same kind, literals and priority whose
    /// successors agree up to such merging, then unfolds the quotient from the
    /// root again. Back-edge sources count as single-child `or` nodes, so the
    /// result's paths carry the same kinds, literals and priorities.
    pub fn compress(&self) -> TreeWithBackEdges {
        let key = |n: &TwbNode| {
            let kind = if n.kind == TwbKind::Jump { TwbKind::Choice } else { n.kind };
            (kind, n.literals.clone(), n.priority)
        };
        let adj = self.graph();
        let mut keys: Vec<_> = self.nodes.iter().map(key).collect();
        keys.sort();
        keys.dedup();
        let mut class: Vec<usize> =
            self.nodes.iter().map(|n| keys.binary_search(&key(n)).expect("own key")).collect();
        loop {
            let sig: Vec<(usize, BTreeSet<usize>)> =
                (0..self.len()).map(|v| (class[v], adj[v].iter().map(|&w| class[w]).collect())).collect();
            let mut sorted = sig.clone();
            sorted.sort();
            sorted.dedup();
            let next: Vec<usize> = sig.iter().map(|s| sorted.binary_search(s).expect("own signature")).collect();
            let stable = sorted.len() == class.iter().collect::<BTreeSet<_>>().len();
            class = next;
            if stable {
                break;
            }
        }
        let blocks = class.iter().max().map_or(0, |m| m + 1);
        let mut rep = vec![usize::MAX; blocks];
        for v in (0..self.len()).rev() {
            rep[class[v]] = v;
        }
        let succ: Vec<BTreeSet<usize>> =
            (0..blocks).map(|b| adj[rep[b]].iter().map(|&w| class[w]).collect()).collect();
        let mut nodes: Vec<TwbNode> = Vec::new();
        let mut path: Vec<(usize, usize)> = Vec::new();
        fn unfold(
            t: &TreeWithBackEdges,
            b: usize,
            rep: &[usize],
            succ: &[BTreeSet<usize>],
            nodes: &mut Vec<TwbNode>,
            path: &mut Vec<(usize, usize)>,
        ) -> usize {
            let src = &t.nodes[rep[b]];
            let kind = if src.kind == TwbKind::Jump { TwbKind::Choice } else { src.kind };
            let id = nodes.len();
            nodes.push(TwbNode { kind, literals: src.literals.clone(), priority: src.priority, children: Vec::new(), back: None });
            path.push((b, id));
            let mut kids = Vec::new();
            for &c in &succ[b] {
                let kid = match path.iter().find(|(pb, _)| *pb == c) {
                    Some(&(_, target)) => {
                        nodes.push(TwbNode::jump(target));
                        nodes.len() - 1
                    }
                    None => unfold(t, c, rep, succ, nodes, path),
                };
                kids.push(kid);
            }
            path.pop();
            nodes[id].children = kids;
            id
        }
        let root = unfold(self, class[self.root], &rep, &succ, &mut nodes, &mut path);
        TreeWithBackEdges { nodes, root }.contract_pass_through_zero()
    }

    /// Like `contract_pass_through`, but only for nodes of priority 0, which
    /// is always sound.
    fn contract_pass_through_zero(&self) -> TreeWithBackEdges {
        let targets = self.back_targets();
        let skip = |v: usize| {
            let n = &self.nodes[v];
            n.kind == TwbKind::Choice && n.children.len() == 1 && n.priority == 0 && !targets.contains(&v)
        };
        let resolve = |mut v: usize| {
            while skip(v) {
                v = self.nodes[v].children[0];
            }
            v
        };
        let mut nodes = self.nodes.clone();
        for n in &mut nodes {
            for c in &mut n.children {
                *c = resolve(*c);
            }
        }
        TreeWithBackEdges { nodes, root: resolve(self.root) }.canonical()
    }
}

fn parse_literal(s: &str) -> Option<Literal> {
    let valid = |p: &str| {
        p.chars().next().is_some_and(|c| c.is_ascii_lowercase())
            && p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && p != "tt"
            && p != "ff"
            && p != "mu"
            && p != "nu"
    };
    if s == "ff" {
        Some(Literal::False)
    } else if let Some(p) = s.strip_prefix('~') {
        valid(p).then(|| Literal::Neg(p.to_string()))
    } else {
        valid(s).then(|| Literal::Pos(s.to_string()))
    }
}

struct RawNode {
    id: String,
    line: usize,
    kind: Option<TwbKind>,
    lits: BTreeSet<Literal>,
    prio: u32,
    children: Vec<(String, usize)>,
    back: Option<(String, usize)>,
}

pub fn parse_twb(text: &str) -> std::result::Result<TreeWithBackEdges, ParseError> {
    let mut root: Option<(String, usize, usize)> = None;
    let mut raw: Vec<RawNode> = Vec::new();
    let mut ids: BTreeMap<String, usize> = BTreeMap::new();

    for (li, full) in text.lines().enumerate() {
        let line = full.split('#').next().unwrap_or("");
        let lno = li + 1;
        let words: Vec<&str> = line.split_whitespace().collect();
        let Some(&head) = words.first() else { continue };
        let col_of = |w: &str| line.find(w).map(|c| c + 1).unwrap_or(1);
        match head {
            "root" => {
                if words.len() != 2 {
                    return Err(ParseError::at_line("`root` takes one node id", lno, 1, head.len()));
                }
                root = Some((words[1].to_string(), lno, col_of(words[1])));
            }
            "node" => {
                let Some(&id) = words.get(1) else {
                    return Err(ParseError::at_line("`node` needs an id", lno, 1, head.len()));
                };
                if ids.contains_key(id) {
                    return Err(ParseError::at_line(format!("node `{id}` declared twice"), lno, col_of(id), id.len()));
                }
                let mut node = RawNode {
                    id: id.to_string(),
                    line: lno,
                    kind: None,
                    lits: BTreeSet::new(),
                    prio: 0,
                    children: Vec::new(),
                    back: None,
                };
                for &w in &words[2..] {
                    let col = col_of(w);
                    let err = |m: String| ParseError::at_line(m, lno, col, w.len());
                    let (key, value) = w.split_once('=').ok_or_else(|| err(format!("expected key=value, found `{w}`")))?;
                    match key {
                        "kind" => {
                            node.kind = Some(match value {
                                "modal" => TwbKind::Modal,
                                "or" => TwbKind::Choice,
                                "leaf" => TwbKind::Leaf,
                                "jump" => TwbKind::Jump,
                                other => return Err(err(format!("unknown kind `{other}`"))),
                            })
                        }
                        "lits" => {
                            for l in value.split(',').filter(|s| !s.is_empty() && *s != "tt") {
                                let lit = parse_literal(l).ok_or_else(|| err(format!("bad literal `{l}`")))?;
                                node.lits.insert(lit);
                            }
                        }
                        "prio" => {
                            node.prio = value.parse().map_err(|_| err(format!("bad priority `{value}`")))?;
                        }
                        "children" => {
                            node.children = value
                                .split(',')
                                .filter(|s| !s.is_empty())
                                .map(|c| (c.to_string(), col))
                                .collect();
                        }
                        "back" => node.back = Some((value.to_string(), col)),
                        other => return Err(err(format!("unknown key `{other}`"))),
                    }
                }
                match (node.kind, &node.back) {
                    (None, None) => {
                        return Err(ParseError::at_line("node needs `kind=` or `back=`", lno, col_of(id), id.len()))
                    }
                    (Some(k), Some((_, col))) if k != TwbKind::Jump => {
                        return Err(ParseError::at_line("a back-edge source has no kind", lno, *col, 1))
                    }
                    (Some(TwbKind::Jump), None) => {
                        return Err(ParseError::at_line("`kind=jump` needs `back=`", lno, col_of(id), id.len()))
                    }
                    _ => {}
                }
                ids.insert(id.to_string(), raw.len());
                raw.push(node);
            }
            other => {
                return Err(ParseError::at_line(format!("unknown directive `{other}`"), lno, 1, other.len()));
            }
        }
    }

    let Some((root_id, rline, rcol)) = root else {
        return Err(ParseError::at_line("missing `root` line", text.lines().count().max(1), 1, 1));
    };
    let lookup = |id: &str, line: usize, col: usize| {
        ids.get(id)
            .copied()
            .ok_or_else(|| ParseError::at_line(format!("unknown node `{id}`"), line, col, id.len()))
    };
    let root = lookup(&root_id, rline, rcol)?;
    let mut nodes = Vec::with_capacity(raw.len());
    for r in &raw {
        let children = r
            .children
            .iter()
            .map(|(c, col)| lookup(c, r.line, *col))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let back = match &r.back {
            Some((b, col)) => Some(lookup(b, r.line, *col)?),
            None => None,
        };
        let kind = if back.is_some() { TwbKind::Jump } else { r.kind.expect("checked above") };
        if kind == TwbKind::Jump && !children.is_empty() {
            return Err(ParseError::at_line("a back-edge source has no children", r.line, 1, 4));
        }
        nodes.push(TwbNode { kind, literals: r.lits.clone(), priority: r.prio, children, back });
    }
    let tree = TreeWithBackEdges { nodes, root };
    if let Err(Error::MalformedTree(m)) = tree.validate() {
        // Point at the first node named in the message when possible.
        let line = m
            .split(|c: char| !c.is_ascii_digit())
            .find_map(|d| d.parse::<usize>().ok())
            .and_then(|i| raw.get(i))
            .map(|r| r.line)
            .unwrap_or(1);
        let named = rename_ids(&m, &raw);
        return Err(ParseError::at_line(named, line, 1, 4));
    }
    Ok(tree)
}

fn rename_ids(msg: &str, raw: &[RawNode]) -> String {
    let mut out = String::new();
    let mut digits = String::new();
    let flush = |digits: &mut String, out: &mut String| {
        if !digits.is_empty() {
            match digits.parse::<usize>().ok().and_then(|i| raw.get(i)) {
                Some(r) => out.push_str(&format!("`{}`", r.id)),
                None => out.push_str(digits),
            }
            digits.clear();
        }
    };
    for c in msg.chars() {
        if c.is_ascii_digit() {
            digits.push(c);
        } else {
            flush(&mut digits, &mut out);
            out.push(c);
        }
    }
    flush(&mut digits, &mut out);
    out
}

pub fn print_twb(t: &TreeWithBackEdges) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "root n{}", t.root);
    for (i, n) in t.nodes.iter().enumerate() {
        let _ = write!(out, "node n{i}");
        match n.kind {
            TwbKind::Modal => out.push_str(" kind=modal"),
            TwbKind::Choice => out.push_str(" kind=or"),
            TwbKind::Leaf => out.push_str(" kind=leaf"),
            TwbKind::Jump => {}
        }
        if !n.literals.is_empty() {
            let lits: Vec<String> = n.literals.iter().map(|l| l.to_string()).collect();
            let _ = write!(out, " lits={}", lits.join(","));
        }
        let _ = write!(out, " prio={}", n.priority);
        if !n.children.is_empty() {
            let cs: Vec<String> = n.children.iter().map(|c| format!("n{c}")).collect();
            let _ = write!(out, " children={}", cs.join(","));
        }
        if let Some(b) = n.back {
            let _ = write!(out, " back=n{b}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOOP: &str = "root n0\nnode n0 kind=modal lits=a prio=1 children=n1\nnode n1 prio=0 back=n0\n";

    #[test]
    fn parse_and_print() {
        let t = parse_twb(LOOP).unwrap();
        assert_eq!(t.nodes[0].kind, TwbKind::Modal);
        assert_eq!(t.nodes[1].back, Some(0));
        assert_eq!(print_twb(&t), LOOP);
    }

    #[test]
    fn back_edge_to_non_ancestor_is_rejected() {
        let text = "root r\nnode r kind=or children=x,y\nnode x kind=leaf\nnode y back=x\n";
        let e = parse_twb(text).unwrap_err();
        assert!(e.message.contains("non-ancestor"), "{}", e.message);
        assert_eq!(e.span.line, 4);
    }

    #[test]
    fn dangling_target_and_missing_root() {
        let e = parse_twb("root n0\nnode n0 kind=modal children=n1\nnode n1 back=n7\n").unwrap_err();
        assert_eq!(e.span.line, 3);
        assert!(parse_twb("node n0 kind=leaf\n").is_err());
        assert!(parse_twb("root n0\nnode n0 kind=bogus\n").is_err());
        assert!(parse_twb("root n0\nnode n0 kind=leaf lits=A\n").is_err());
    }

    #[test]
    fn ordering_predicate() {
        let ordered = parse_twb(LOOP).unwrap();
        assert!(ordered.is_ordered());
        let bad = parse_twb(
            "root n0\nnode n0 kind=or prio=1 children=n1\nnode n1 kind=modal prio=2 children=n2,n3\nnode n2 back=n0\nnode n3 back=n1\n",
        )
        .unwrap();
        assert!(!bad.is_ordered());
    }

    #[test]
    fn pass_through_contraction() {
        let t = parse_twb("root a\nnode a kind=or children=b\nnode b kind=modal prio=1 children=c\nnode c back=b\n").unwrap();
        let c = t.contract_pass_through();
        assert_eq!(c.len(), 2);
        assert_eq!(c.nodes[0].kind, TwbKind::Modal);
    }

    #[test]
    fn compress_merges_equal_branches() {
        let t = parse_twb(
            "root r\nnode r kind=or children=a,b\nnode a kind=modal lits=p prio=1 children=ja\nnode ja back=r\n\
             node b kind=modal lits=p prio=1 children=jb\nnode jb back=r\n",
        )
        .unwrap();
        let c = t.compress();
        assert_eq!(c.nodes[c.root].children.len(), 1);
        assert_eq!(c.len(), 3);
        assert_eq!(c.max_priority(), 1);
    }
}
