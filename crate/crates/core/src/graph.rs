//! Small directed-graph helpers over adjacency lists.

use std::collections::{BTreeSet, VecDeque};

/// Strongly connected components of the subgraph induced by `within`
/// (iterative Tarjan). Components come out in reverse topological order.
pub fn sccs(adj: &[Vec<usize>], within: &[bool]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for s in 0..n {
        if !within[s] || index[s] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(s, 0)];
        index[s] = counter;
        low[s] = counter;
        counter += 1;
        stack.push(s);
        on_stack[s] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if !within[w] {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Whether a component carries at least one cycle.
pub fn is_cyclic(adj: &[Vec<usize>], comp: &[usize]) -> bool {
    comp.len() > 1 || adj[comp[0]].contains(&comp[0])
}

/// Cyclic components of the subgraph induced by `within`.
pub fn cyclic_sccs(adj: &[Vec<usize>], within: &[bool]) -> Vec<Vec<usize>> {
    sccs(adj, within).into_iter().filter(|c| is_cyclic(adj, c)).collect()
}

/// Nodes lying on some cycle.
pub fn on_cycle(adj: &[Vec<usize>]) -> Vec<bool> {
    let mut out = vec![false; adj.len()];
    for c in cyclic_sccs(adj, &vec![true; adj.len()]) {
        for v in c {
            out[v] = true;
        }
    }
    out
}

/// Shortest path from `from` to `to` inside `within` (both endpoints included).
pub fn shortest_path(adj: &[Vec<usize>], within: &[bool], from: usize, to: usize) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &adj[v] {
            if within[w] && !seen[w] {
                seen[w] = true;
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

/// A closed walk from `base` using every edge inside the strongly connected
/// set `within`. The walk is listed without repeating `base` at the end.
pub fn covering_walk(adj: &[Vec<usize>], within: &[bool], base: usize) -> Vec<usize> {
    let mut walk = vec![base];
    for u in 0..adj.len() {
        if !within[u] {
            continue;
        }
        for &v in &adj[u] {
            if !within[v] || walk.windows(2).any(|w| w == [u, v]) {
                continue;
            }
            let to_u = shortest_path(adj, within, *walk.last().expect("nonempty"), u).expect("strongly connected");
            walk.extend_from_slice(&to_u[1..]);
            walk.push(v);
        }
    }
    let back = shortest_path(adj, within, *walk.last().expect("nonempty"), base).expect("strongly connected");
    walk.extend_from_slice(&back[1..]);
    walk.pop();
    walk
}

/// Edges of a closed walk, including the closing edge.
pub fn walk_edges(walk: &[usize]) -> BTreeSet<(usize, usize)> {
    (0..walk.len()).map(|i| (walk[i], walk[(i + 1) % walk.len()])).collect()
}

pub fn is_closed_walk(adj: &[Vec<usize>], walk: &[usize]) -> bool {
    !walk.is_empty() && walk_edges(walk).iter().all(|(a, b)| adj[*a].contains(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_and_walks() {
        let adj = vec![vec![1], vec![0, 2], vec![3], vec![2], vec![]];
        let comps = cyclic_sccs(&adj, &[true; 5]);
        assert_eq!(comps.len(), 2);
        assert!(comps.contains(&vec![0, 1]));
        assert!(comps.contains(&vec![2, 3]));
        assert_eq!(on_cycle(&adj), vec![true, true, true, true, false]);
        let within = vec![true, true, false, false, false];
        let w = covering_walk(&adj, &within, 0);
        assert!(is_closed_walk(&adj, &w));
        assert_eq!(walk_edges(&w), BTreeSet::from([(0, 1), (1, 0)]));
    }

    #[test]
    fn covering_walk_uses_every_edge() {
        let adj = vec![vec![1, 2], vec![0, 2], vec![0]];
        let within = vec![true; 3];
        let w = covering_walk(&adj, &within, 2);
        assert_eq!(w[0], 2);
        assert_eq!(walk_edges(&w).len(), 5);
    }
}
