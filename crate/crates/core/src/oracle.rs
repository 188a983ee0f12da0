//! Brute-force cross-checks. Each oracle decides the same question as a
//! library routine by plain enumeration, without trace-matrix closure,
//! attractors or SCC decompositions, and is only meant for small inputs.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::game::{Arena, Player};
use crate::tableau::LabelGraph;
use crate::twb::TreeWithBackEdges;

/// Whether the lasso `u.v^omega` of `g` carries a mu-trace, found by walking
/// `u.v^unroll` one edge at a time and listing traces. A trace is reported
/// when it returns to a formula at a later copy of `v` with an odd maximum on
/// the way; that segment then repeats forever.
pub fn enumerate_lasso(g: &LabelGraph, u: &[usize], v: &[usize], unroll: usize) -> Result<bool> {
    if v.is_empty() {
        return Err(Error::PathNotInGraph("empty cycle".into()));
    }
    let mut path: Vec<usize> = u.to_vec();
    for _ in 0..unroll {
        path.extend_from_slice(v);
    }
    path.push(v[0]);
    if path[0] != g.root {
        return Err(Error::PathNotInGraph("lasso does not start at the root".into()));
    }
    // One edge's (from, to, weight) triples, weight bits split out.
    let mut steps: Vec<Vec<(usize, usize, u32)>> = Vec::new();
    for w in path.windows(2) {
        let m = g.edge(w[0], w[1]).ok_or_else(|| Error::PathNotInGraph(format!("no edge {} -> {}", w[0], w[1])))?;
        let mut s = Vec::new();
        for ((f, h), mask) in m.entries() {
            for p in 0..64 {
                if mask & (1u64 << p) != 0 {
                    s.push((f, h, p));
                }
            }
        }
        steps.push(s);
    }
    let boundary = |i: usize| u.len() + i * v.len();

    // Formulas carried by some trace at every position.
    let mut alive: Vec<BTreeSet<usize>> = vec![g.start()];
    for s in &steps {
        let here = alive.last().expect("nonempty");
        alive.push(s.iter().filter(|(f, _, _)| here.contains(f)).map(|&(_, h, _)| h).collect());
    }

    for i in 0..unroll {
        for &f in &alive[boundary(i)] {
            let mut seen: HashSet<(usize, usize, u32)> = HashSet::new();
            let mut stack = vec![(boundary(i), f, 0u32)];
            while let Some((pos, h, top)) = stack.pop() {
                if pos > boundary(i) && (pos - u.len()).is_multiple_of(v.len()) && h == f && top % 2 == 1 {
                    return Ok(true);
                }
                if pos == steps.len() || !seen.insert((pos, h, top)) {
                    continue;
                }
                for &(a, b, w) in &steps[pos] {
                    if a == h {
                        stack.push((pos + 1, b, top.max(w)));
                    }
                }
            }
        }
    }
    Ok(false)
}

/// Winning regions by trying every pair of positional strategies. Exact by
/// positional determinacy; exponential in the number of positions.
pub fn brute_force_regions(a: &Arena) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let n = a.len();
    let choosers = |p: Player| -> Vec<usize> { (0..n).filter(|&v| a.owner[v] == p && !a.moves[v].is_empty()).collect() };
    let even = choosers(Player::Even);
    let odd = choosers(Player::Odd);
    let all = |vs: &[usize]| -> Vec<Vec<usize>> {
        let mut out = vec![vec![0usize; n]];
        for &v in vs {
            out = out
                .into_iter()
                .flat_map(|s| {
                    (0..a.moves[v].len()).map(move |k| {
                        let mut t = s.clone();
                        t[v] = k;
                        t
                    })
                })
                .collect();
        }
        out
    };
    let (se, so) = (all(&even), all(&odd));
    let play = |start: usize, choice_e: &[usize], choice_o: &[usize]| -> Player {
        let mut order = vec![usize::MAX; n];
        let mut seq = Vec::new();
        let mut v = start;
        loop {
            if a.moves[v].is_empty() {
                return Player::of_priority(a.priority[v]);
            }
            if order[v] != usize::MAX {
                let top = seq[order[v]..].iter().map(|&w| a.priority[w]).max().expect("cycle");
                return Player::of_priority(top);
            }
            order[v] = seq.len();
            seq.push(v);
            let k = if a.owner[v] == Player::Even { choice_e[v] } else { choice_o[v] };
            v = a.moves[v][k];
        }
    };
    let mut win_even = BTreeSet::new();
    let mut win_odd = BTreeSet::new();
    for v in 0..n {
        let even_wins = se.iter().any(|e| so.iter().all(|o| play(v, e, o) == Player::Even));
        if even_wins {
            win_even.insert(v);
        } else {
            win_odd.insert(v);
        }
    }
    (win_even, win_odd)
}

/// Every strongly connected node set of `t` with its top priority, found by
/// testing all subsets of the nodes that lie on some cycle. Only for trees
/// with at most 16 such nodes.
pub fn cycle_sets(t: &TreeWithBackEdges) -> Result<Vec<(Vec<usize>, u32)>> {
    let adj = t.graph();
    let n = t.len();
    let reach = |from: usize, within: &[bool]| -> Vec<bool> {
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if within[y] && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    };
    let everything = vec![true; n];
    let cyclic: Vec<usize> = (0..n).filter(|&x| reach(x, &everything)[x]).collect();
    if cyclic.len() > 16 {
        return Err(Error::Budget(format!("{} cyclic nodes; the subset oracle takes at most 16", cyclic.len())));
    }
    let mut out = Vec::new();
    for bits in 1u32..(1 << cyclic.len()) {
        let set: Vec<usize> = (0..cyclic.len()).filter(|&i| bits & (1 << i) != 0).map(|i| cyclic[i]).collect();
        let mut within = vec![false; n];
        for &x in &set {
            within[x] = true;
        }
        let r = reach(set[0], &within);
        let strongly = set.iter().all(|&x| r[x]) && set.iter().all(|&x| reach(x, &within)[set[0]]);
        if strongly {
            let top = set.iter().map(|&x| t.nodes[x].priority).max().expect("nonempty");
            out.push((set, top));
        }
    }
    Ok(out)
}

/// Whether two priority maps on the same graph give every cycle the same
/// parity.
pub fn same_cycle_parities(t: &TreeWithBackEdges, other: &[u32]) -> Result<bool> {
    Ok(cycle_sets(t)?.iter().all(|(set, top)| {
        let alt = set.iter().map(|&x| other[x]).max().expect("nonempty");
        top % 2 == alt % 2
    }))
}

/// Fewest non-zero priorities any parity-preserving node map of `t` needs,
/// by trying every map into `{0..k}` for growing `k`.
pub fn least_priorities(t: &TreeWithBackEdges) -> Result<u32> {
    let sets = cycle_sets(t)?;
    let nodes: Vec<usize> = sets.iter().flat_map(|(s, _)| s.iter().copied()).collect::<BTreeSet<_>>().into_iter().collect();
    let fits = |prio: &[u32]| {
        sets.iter().all(|(set, top)| set.iter().map(|&x| prio[x]).max().expect("nonempty") % 2 == top % 2)
    };
    for k in 0..=t.max_priority() {
        let total = (k as u64 + 1).checked_pow(nodes.len() as u32).unwrap_or(u64::MAX);
        if total > 5_000_000 {
            return Err(Error::Budget(format!("{total} maps into 0..={k}")));
        }
        let mut prio = vec![0u32; t.len()];
        for code in 0..total {
            let mut c = code;
            for &x in &nodes {
                prio[x] = (c % (k as u64 + 1)) as u32;
                c /= k as u64 + 1;
            }
            if fits(&prio) {
                return Ok(k);
            }
        }
    }
    // The map itself always fits.
    Ok(t.max_priority())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::solve;
    use crate::twb::parse_twb;

    #[test]
    fn two_position_game() {
        let mut a = Arena::default();
        let x = a.add(Player::Even, 1, "x");
        let y = a.add(Player::Odd, 2, "y");
        a.add_move(x, y);
        a.add_move(y, x);
        a.add_move(x, x);
        let (e, o) = brute_force_regions(&a);
        let s = solve(&a);
        assert_eq!(e, s.win_even);
        assert_eq!(o, s.win_odd);
        assert!(e.contains(&x));
    }

    #[test]
    fn nested_loops_need_two() {
        let t = parse_twb(
            "root r\nnode r kind=modal prio=4 children=a\nnode a kind=modal prio=3 children=j1,j2\n\
             node j1 back=a\nnode j2 back=r\n",
        )
        .unwrap();
        assert_eq!(least_priorities(&t).unwrap(), 2);
        // {a, j1}, {r, a, j2} and their union.
        assert_eq!(cycle_sets(&t).unwrap().len(), 3);
    }
}
