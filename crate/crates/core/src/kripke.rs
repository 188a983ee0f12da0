//! Pointed transition systems and their line-oriented `.kst` format.
//!
//! ```text
//! # comment
//! state s0 a b
//! state s1
//! init s0
//! edge s0 s1
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::parse::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeStructure {
    /// State names, indexed by state id.
    pub names: Vec<String>,
    pub init: usize,
    /// Successor lists, sorted and deduplicated.
    pub succ: Vec<Vec<usize>>,
    pub props: Vec<BTreeSet<String>>,
}

impl KripkeStructure {
    pub fn new(
        props: Vec<BTreeSet<String>>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        init: usize,
    ) -> Self {
        let n = props.len();
        assert!(init < n, "initial state out of range");
        let mut succ = vec![Vec::new(); n];
        for (a, b) in edges {
            assert!(a < n && b < n, "edge out of range");
            succ[a].push(b);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        let names = (0..n).map(|i| format!("s{i}")).collect();
        KripkeStructure { names, init, succ, props }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn holds(&self, s: usize, p: &str) -> bool {
        self.props[s].contains(p)
    }
}

pub fn parse_structure(text: &str) -> Result<KripkeStructure, ParseError> {
    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut names = Vec::new();
    let mut props = Vec::new();
    let mut init: Option<(String, usize)> = None;
    let mut edges: Vec<(String, String, usize)> = Vec::new();

    for (li, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = line.split_whitespace().collect();
        let Some(&head) = words.first() else { continue };
        let col = raw.find(head).unwrap_or(0) + 1;
        let lno = li + 1;
        match head {
            "state" => {
                let Some(&id) = words.get(1) else {
                    return Err(ParseError::at_line("`state` needs an id", lno, col, head.len()));
                };
                if ids.contains_key(id) {
                    return Err(ParseError::at_line(format!("state `{id}` declared twice"), lno, col, line.trim_end().len()));
                }
                ids.insert(id.to_string(), names.len());
                names.push(id.to_string());
                props.push(words[2..].iter().map(|p| p.to_string()).collect());
            }
            "init" => {
                if words.len() != 2 {
                    return Err(ParseError::at_line("`init` takes exactly one state", lno, col, head.len()));
                }
                init = Some((words[1].to_string(), lno));
            }
            "edge" => {
                if words.len() != 3 {
                    return Err(ParseError::at_line("`edge` takes two states", lno, col, head.len()));
                }
                edges.push((words[1].to_string(), words[2].to_string(), lno));
            }
            other => {
                return Err(ParseError::at_line(format!("unknown directive `{other}`"), lno, col, other.len()));
            }
        }
    }
    let lookup = |id: &str, line: usize| {
        ids.get(id)
            .copied()
            .ok_or_else(|| ParseError::at_line(format!("unknown state `{id}`"), line, 1, id.len()))
    };
    let Some((init_id, init_line)) = init else {
        let last = text.lines().count().max(1);
        return Err(ParseError::at_line("missing `init` line", last, 1, 1));
    };
    let init = lookup(&init_id, init_line)?;
    let mut succ = vec![Vec::new(); names.len()];
    for (a, b, line) in &edges {
        let (a, b) = (lookup(a, *line)?, lookup(b, *line)?);
        succ[a].push(b);
    }
    for s in &mut succ {
        s.sort_unstable();
        s.dedup();
    }
    Ok(KripkeStructure { names, init, succ, props })
}

pub fn print_structure(m: &KripkeStructure) -> String {
    let mut out = String::new();
    for (i, name) in m.names.iter().enumerate() {
        out.push_str("state ");
        out.push_str(name);
        for p in &m.props[i] {
            out.push(' ');
            out.push_str(p);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "init {}", m.names[m.init]);
    for (a, succ) in m.succ.iter().enumerate() {
        for &b in succ {
            let _ = writeln!(out, "edge {} {}", m.names[a], m.names[b]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_loop() {
        let m = parse_structure("state s0 a\ninit s0\nedge s0 s0").unwrap();
        assert_eq!(m.len(), 1);
        assert!(m.holds(0, "a"));
        assert_eq!(m.succ[0], vec![0]);
        assert_eq!(parse_structure(&print_structure(&m)).unwrap(), m);
    }

    #[test]
    fn errors() {
        let e = parse_structure("state s0\ninit s0\nedge s0 s9").unwrap_err();
        assert_eq!(e.span.line, 3);
        assert!(parse_structure("state s0\nedge s0 s0").unwrap_err().message.contains("init"));
        assert!(parse_structure("state s0\ninit s1").is_err());
        assert!(parse_structure("state s0\nstate s0\ninit s0").is_err());
        assert!(parse_structure("node s0\ninit s0").is_err());
    }

    #[test]
    fn comments() {
        let m = parse_structure("# two states\nstate a p # labelled\nstate b\ninit b\nedge b a\n").unwrap();
        assert_eq!(m.init, 1);
        assert_eq!(m.succ[1], vec![0]);
    }
}
