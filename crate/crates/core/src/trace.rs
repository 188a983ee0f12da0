//! Trace matrices: for a path segment, which formula reaches which with what
//! maximal regeneration weight. Weights are stored as bitmasks, so a matrix
//! entry is a set of priorities below 64.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

/// Sparse matrix from formula ids to sets of priorities.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TraceMatrix {
    entries: BTreeMap<(usize, usize), u64>,
}

/// `{ max(x, y) : x in a, y in b }` on priority bitmasks.
pub fn max_masks(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    let low_a = a.trailing_zeros();
    let low_b = b.trailing_zeros();
    let above = |m: u64, low: u32| m & !((1u64 << low) - 1);
    above(a, low_b) | above(b, low_a)
}

pub fn bit(p: u32) -> u64 {
    assert!(p < 64, "priority {p} out of range");
    1u64 << p
}

pub fn mask_has_odd(m: u64) -> bool {
    m & 0xAAAA_AAAA_AAAA_AAAA != 0
}

pub fn mask_max(m: u64) -> Option<u32> {
    (m != 0).then(|| 63 - m.leading_zeros())
}

impl TraceMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Diagonal with weight 0 over `universe`.
    pub fn identity(universe: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Self::new();
        for f in universe {
            m.insert(f, f, 0);
        }
        m
    }

    pub fn single(f: usize, g: usize, w: u32) -> Self {
        let mut m = Self::new();
        m.insert(f, g, w);
        m
    }

    pub fn insert(&mut self, f: usize, g: usize, w: u32) {
        *self.entries.entry((f, g)).or_insert(0) |= bit(w);
    }

    pub fn insert_mask(&mut self, f: usize, g: usize, mask: u64) {
        if mask != 0 {
            *self.entries.entry((f, g)).or_insert(0) |= mask;
        }
    }

    pub fn get(&self, f: usize, g: usize) -> u64 {
        self.entries.get(&(f, g)).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    /// Priorities as sorted lists, for reports.
    pub fn to_lists(&self) -> Vec<(usize, usize, Vec<u32>)> {
        self.entries
            .iter()
            .map(|(&(f, g), &m)| (f, g, (0..64).filter(|&p| m & bit(p) != 0).collect()))
            .collect()
    }

    pub fn max_weight(&self) -> u32 {
        self.entries.values().filter_map(|&m| mask_max(m)).max().unwrap_or(0)
    }

    pub fn compose(&self, other: &TraceMatrix) -> TraceMatrix {
        let mut out = TraceMatrix::new();
        for (&(f, g), &a) in &self.entries {
            for (&(_, h), &b) in other.entries.range((g, 0)..=(g, usize::MAX)) {
                out.insert_mask(f, h, max_masks(a, b));
            }
        }
        out
    }

    pub fn union(&self, other: &TraceMatrix) -> TraceMatrix {
        let mut out = self.clone();
        for (&(f, g), &m) in &other.entries {
            out.insert_mask(f, g, m);
        }
        out
    }

    /// Formulas reachable from `from` in one step.
    pub fn image(&self, from: &BTreeSet<usize>) -> BTreeSet<usize> {
        self.entries.keys().filter(|(f, _)| from.contains(f)).map(|&(_, g)| g).collect()
    }

    /// Union of all positive powers `M, M^2, ...`.
    pub fn plus(&self) -> TraceMatrix {
        let mut t = self.clone();
        loop {
            let next = t.union(&t.compose(&t));
            if next == t {
                return t;
            }
            t = next;
        }
    }

    /// Whether repeating this cycle matrix forever, entered with the formulas
    /// `start`, carries a trace whose eventual maximal weight is odd.
    pub fn has_mu_trace(&self, start: &BTreeSet<usize>) -> bool {
        let t = self.plus();
        let mut reach = start.clone();
        let mut frontier: Vec<usize> = start.iter().copied().collect();
        while let Some(f) = frontier.pop() {
            for (&(_, g), _) in t.entries.range((f, 0)..=(f, usize::MAX)) {
                if reach.insert(g) {
                    frontier.push(g);
                }
            }
        }
        reach.iter().any(|&h| mask_has_odd(t.get(h, h)))
    }
}

/// Matrix product: entries are maxima over pairs of composable segments.
pub fn compose(a: &TraceMatrix, b: &TraceMatrix) -> TraceMatrix {
    a.compose(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_max_products() {
        assert_eq!(max_masks(bit(1), bit(2)), bit(2));
        assert_eq!(max_masks(bit(0) | bit(3), bit(1)), bit(1) | bit(3));
        assert_eq!(max_masks(bit(2), bit(0) | bit(4)), bit(2) | bit(4));
        assert_eq!(max_masks(0, bit(1)), 0);
        for a in 1u64..64 {
            for b in 1u64..64 {
                let mut want = 0;
                for x in 0..6 {
                    for y in 0..6 {
                        if a & bit(x) != 0 && b & bit(y) != 0 {
                            want |= bit(x.max(y));
                        }
                    }
                }
                assert_eq!(max_masks(a, b), want);
            }
        }
    }

    #[test]
    fn identity_and_example_product() {
        let mut m = TraceMatrix::single(0, 1, 3);
        m.insert(1, 1, 2);
        let id = TraceMatrix::identity([0, 1]);
        assert_eq!(id.compose(&m), m);
        assert_eq!(m.compose(&id), m);
        let f = TraceMatrix::single(7, 8, 1);
        let g = TraceMatrix::single(8, 7, 2);
        assert_eq!(f.compose(&g), TraceMatrix::single(7, 7, 2));
    }

    #[test]
    fn mu_trace_on_cycles() {
        let odd = TraceMatrix::single(0, 0, 1);
        assert!(odd.has_mu_trace(&BTreeSet::from([0])));
        // Formula 0 regenerates with 1, but is overruled by 2 on every turn.
        let mut m = TraceMatrix::single(0, 1, 1);
        m.insert(1, 0, 2);
        assert!(!m.has_mu_trace(&BTreeSet::from([0])));
        // A trace that is only reachable through another formula.
        let mut m = TraceMatrix::single(0, 1, 0);
        m.insert(1, 1, 3);
        m.insert(0, 0, 2);
        assert!(m.has_mu_trace(&BTreeSet::from([0])));
        assert!(!m.has_mu_trace(&BTreeSet::new()));
    }
}
