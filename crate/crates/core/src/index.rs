//! Priority analysis of trees with back edges: maximal witnesses, priority
//! reduction and minimization, and priority assignment on tableau cores.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::compact_priorities;
use crate::graph::{covering_walk, cyclic_sccs, is_closed_walk, on_cycle, walk_edges};
use crate::twb::TreeWithBackEdges;

/// Nested closed walks `c_1 ⊆ c_2 ⊆ ... ⊆ c_q` (by edge sets) where the
/// highest priority on `c_i` has the parity of `i`. Walks are node lists;
/// the last node has an edge back to the first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub q: u32,
    pub cycles: Vec<Vec<usize>>,
}

impl Witness {
    pub fn validate(&self, t: &TreeWithBackEdges) -> std::result::Result<(), String> {
        if self.cycles.len() != self.q as usize {
            return Err(format!("{} cycles for q = {}", self.cycles.len(), self.q));
        }
        let adj = t.graph();
        for (i, c) in self.cycles.iter().enumerate() {
            if !is_closed_walk(&adj, c) {
                return Err(format!("cycle {} is not a closed walk", i + 1));
            }
            let top = c.iter().map(|&v| t.nodes[v].priority).max().unwrap_or(0);
            if top % 2 != ((i + 1) % 2) as u32 {
                return Err(format!("cycle {} has top priority {top}", i + 1));
            }
            if i > 0 && !walk_edges(&self.cycles[i - 1]).is_subset(&walk_edges(c)) {
                return Err(format!("cycle {i} is not contained in cycle {}", i + 1));
            }
        }
        Ok(())
    }
}

/// Adds a cycle of top parity `parity` on top of a chain of length `len`
/// when the parities alternate.
fn extend(len: u32, parity: u32) -> u32 {
    if (len + 1) % 2 == parity % 2 {
        len + 1
    } else {
        len
    }
}

/// Longest chain inside the strongly connected set `comp`, as the chain
/// itself. The empty chain counts as even.
fn chain(t: &TreeWithBackEdges, adj: &[Vec<usize>], comp: &[usize]) -> Vec<Vec<usize>> {
    let top = comp.iter().map(|&v| t.nodes[v].priority).max().unwrap_or(0);
    let mut rest = vec![false; adj.len()];
    for &v in comp {
        rest[v] = t.nodes[v].priority < top;
    }
    let mut best: Vec<Vec<usize>> = Vec::new();
    for c in cyclic_sccs(adj, &rest) {
        let inner = chain(t, adj, &c);
        if extend(inner.len() as u32, top) > extend(best.len() as u32, top) {
            best = inner;
        }
    }
    if extend(best.len() as u32, top) > best.len() as u32 {
        let mut within = vec![false; adj.len()];
        for &v in comp {
            within[v] = true;
        }
        let base = best.last().map_or(comp[0], |c| c[0]);
        best.push(covering_walk(adj, &within, base));
    }
    best
}

/// A witness of maximal length for the node priorities of `t`. No priority
/// assignment preserving the parity of every cycle can use fewer than `q`
/// non-zero priorities.
pub fn find_max_witness(t: &TreeWithBackEdges) -> Witness {
    let adj = t.graph();
    let mut best = Vec::new();
    for comp in cyclic_sccs(&adj, &vec![true; adj.len()]) {
        let c = chain(t, &adj, &comp);
        if c.len() > best.len() {
            best = c;
        }
    }
    Witness { q: best.len() as u32, cycles: best }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    Reduced(TreeWithBackEdges),
    /// The chain of sets reaches priority 1; these are its priority-1 nodes.
    Irreducible(Vec<usize>),
}

/// One reduction step. With `q` the top priority, `S_q` holds the priority-`q`
/// nodes on cycles and `S_{i-1}` the priority-`(i-1)` nodes sharing a cycle
/// with `S_i` among nodes of priority below `i` or in `S_i`. If `S_1` is
/// empty, every node of every `S_i` drops by 2 and the parity of each cycle
/// is unchanged. Nodes on no cycle drop to 0 as well.
pub fn reduce_priorities(t: &TreeWithBackEdges) -> Result<Reduction> {
    t.validate()?;
    let adj = t.graph();
    let cyclic = on_cycle(&adj);
    let q = (0..t.len()).filter(|&v| cyclic[v]).map(|v| t.nodes[v].priority).max().unwrap_or(0);
    if q == 0 {
        return Ok(Reduction::Irreducible(Vec::new()));
    }
    let prio = t.priorities();
    let mut levels: Vec<Vec<bool>> = Vec::new();
    let mut cur: Vec<bool> = (0..t.len()).map(|v| cyclic[v] && prio[v] == q).collect();
    let mut i = q;
    while i >= 2 {
        let within: Vec<bool> = (0..t.len()).map(|v| prio[v] < i || cur[v]).collect();
        let mut next = vec![false; t.len()];
        for comp in cyclic_sccs(&adj, &within) {
            if comp.iter().any(|&v| cur[v]) {
                for &v in &comp {
                    if prio[v] == i - 1 {
                        next[v] = true;
                    }
                }
            }
        }
        levels.push(cur);
        cur = next;
        i -= 1;
    }
    let s1: Vec<usize> = (0..t.len()).filter(|&v| cur[v]).collect();
    if !s1.is_empty() {
        return Ok(Reduction::Irreducible(s1));
    }
    let mut out = t.clone();
    for level in &levels {
        for (v, &hit) in level.iter().enumerate() {
            if hit {
                out.nodes[v].priority -= 2;
            }
        }
    }
    for (v, n) in out.nodes.iter_mut().enumerate() {
        if !cyclic[v] {
            n.priority = 0;
        }
    }
    if out == *t {
        return Ok(Reduction::Irreducible(Vec::new()));
    }
    Ok(Reduction::Reduced(out))
}

/// Assigns each strongly connected set the least value of its top parity
/// that is at least the values of its inner sets. Uses exactly as many
/// non-zero priorities as the longest witness.
pub fn rank_priorities(t: &TreeWithBackEdges) -> TreeWithBackEdges {
    fn rank(t: &TreeWithBackEdges, adj: &[Vec<usize>], comp: &[usize], out: &mut [u32]) -> u32 {
        let top = comp.iter().map(|&v| t.nodes[v].priority).max().unwrap_or(0);
        let mut rest = vec![false; adj.len()];
        for &v in comp {
            rest[v] = t.nodes[v].priority < top;
        }
        let mut inner = 0;
        for c in cyclic_sccs(adj, &rest) {
            inner = inner.max(rank(t, adj, &c, out));
        }
        let value = if inner % 2 == top % 2 { inner } else { inner + 1 };
        for &v in comp {
            if t.nodes[v].priority == top {
                out[v] = value;
            }
        }
        value
    }
    let adj = t.graph();
    let mut prio = vec![0; t.len()];
    for comp in cyclic_sccs(&adj, &vec![true; adj.len()]) {
        rank(t, &adj, &comp, &mut prio);
    }
    let mut out = t.clone();
    for (n, p) in out.nodes.iter_mut().zip(prio) {
        n.priority = p;
    }
    out
}

/// Reduces to a fixed point and compacts. If that leaves more priorities than
/// the maximal witness allows, falls back to `rank_priorities`.
pub fn minimize(t: &TreeWithBackEdges) -> Result<TreeWithBackEdges> {
    let mut cur = t.clone();
    while let Reduction::Reduced(next) = reduce_priorities(&cur)? {
        cur = next;
    }
    let mut prio = cur.priorities();
    compact_priorities(&mut prio);
    for (n, p) in cur.nodes.iter_mut().zip(prio) {
        n.priority = p;
    }
    let q = find_max_witness(t).q;
    if cur.max_priority() > q {
        cur = rank_priorities(t);
    }
    if cur.max_priority() != q {
        return Err(Error::Priorities(format!("minimized to {} but the witness has length {q}", cur.max_priority())));
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::gen_beta;
    use crate::disjunctive::disjunctive_to_tree;
    use crate::twb::parse_twb;

    fn loop_tree(prio: u32) -> TreeWithBackEdges {
        parse_twb(&format!("root n0\nnode n0 kind=modal prio={prio} children=n1\nnode n1 back=n0\n")).unwrap()
    }

    #[test]
    fn single_loops() {
        let w = find_max_witness(&loop_tree(1));
        assert_eq!(w.q, 1);
        w.validate(&loop_tree(1)).unwrap();
        assert_eq!(find_max_witness(&loop_tree(2)).q, 0);
        assert_eq!(minimize(&loop_tree(2)).unwrap().max_priority(), 0);
        assert_eq!(minimize(&loop_tree(5)).unwrap().max_priority(), 1);
        assert_eq!(reduce_priorities(&loop_tree(1)).unwrap(), Reduction::Irreducible(vec![0]));
    }

    #[test]
    fn beta_is_tight() {
        let t = disjunctive_to_tree(&gen_beta()).unwrap();
        let w = find_max_witness(&t);
        assert_eq!(w.q, 3);
        w.validate(&t).unwrap();
        assert!(matches!(reduce_priorities(&t).unwrap(), Reduction::Irreducible(_)));
        assert_eq!(minimize(&t).unwrap().max_priority(), 3);
    }

    #[test]
    fn spare_priorities_are_removed() {
        // Inner odd loop at 3 under an even loop at 4: 3 and 4 can become 1 and 2.
        let t = parse_twb(
            "root r\nnode r kind=modal prio=4 children=a\nnode a kind=modal prio=3 children=j1,j2\n\
             node j1 back=a\nnode j2 back=r\n",
        )
        .unwrap();
        assert_eq!(find_max_witness(&t).q, 2);
        let Reduction::Reduced(r) = reduce_priorities(&t).unwrap() else { panic!("reducible") };
        assert_eq!(r.nodes[0].priority, 2);
        assert_eq!(r.nodes[1].priority, 1);
        let m = minimize(&t).unwrap();
        assert_eq!(m.max_priority(), 2);
    }
}
