//! Batch runs: oracle agreement sweeps and the corpus report. Item `i` of a
//! sweep seeded with `s` always uses the generator seeded with `s + i`, so
//! sequential and parallel runs produce identical results.

use std::time::Instant;

use serde::Serialize;

use crate::assign::tableau_alternation_depth;
use crate::corpus::{corpus, CorpusEntry};
use crate::error::Result;
use crate::formula::{minimal_priority_assignment, Formula};
use crate::game::{models, solve};
use crate::oracle::{brute_force_regions, enumerate_lasso};
use crate::par::Exec;
use crate::random::{random_arena, random_lasso, random_structure, rng};
use crate::tableau::{build_label_graph, lasso_has_mu_trace, LabelGraph};

#[derive(Clone, Debug, Default, Serialize)]
pub struct Agreement {
    pub checked: usize,
    /// Checks whose shared verdict was positive (a mu-trace, a win for Even
    /// at the first position, or a model).
    pub positive: usize,
    pub skipped: usize,
    pub disagreements: Vec<String>,
}

impl Agreement {
    fn collect(results: Vec<Option<std::result::Result<bool, String>>>) -> Agreement {
        let mut a = Agreement::default();
        for r in results {
            match r {
                None => a.skipped += 1,
                Some(Ok(p)) => {
                    a.checked += 1;
                    a.positive += usize::from(p);
                }
                Some(Err(e)) => {
                    a.checked += 1;
                    a.disagreements.push(e);
                }
            }
        }
        a
    }

    pub fn ok(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// `lasso_has_mu_trace` against explicit trace enumeration on `count`
/// random lassos spread over `graphs`.
pub fn lasso_agreement(graphs: &[LabelGraph], count: usize, seed: u64, unroll: usize, exec: Exec) -> Agreement {
    let results = exec.map_range(count, |i| {
        let g = &graphs[i % graphs.len()];
        let mut r = rng(seed + i as u64);
        let (u, v) = random_lasso(&mut r, g)?;
        let fast = lasso_has_mu_trace(g, &u, &v);
        let slow = enumerate_lasso(g, &u, &v, unroll);
        Some(match (fast, slow) {
            (Ok(a), Ok(b)) if a == b => Ok(a),
            (a, b) => Err(format!("graph {} lasso {u:?} {v:?}: matrices {a:?}, enumeration {b:?}", i % graphs.len())),
        })
    });
    Agreement::collect(results)
}

/// The parity game solver against positional-strategy enumeration.
pub fn arena_agreement(count: usize, seed: u64, max_positions: usize, priorities: u32, exec: Exec) -> Agreement {
    let results = exec.map_range(count, |i| {
        let a = random_arena(&mut rng(seed + i as u64), max_positions, priorities);
        let s = solve(&a);
        let (even, odd) = brute_force_regions(&a);
        Some(if s.win_even == even && s.win_odd == odd {
            Ok(even.contains(&0))
        } else {
            Err(format!("arena {i}: solver {:?}, enumeration {:?}", s.win_even, even))
        })
    });
    Agreement::collect(results)
}

/// Whether each pair of formulas gets the same verdict on random structures.
pub fn models_agreement(pairs: &[(Formula, Formula)], count: usize, seed: u64, max_states: usize, exec: Exec) -> Agreement {
    let props = ["a", "b", "c", "d", "e"];
    let results = exec.map_range(count, |i| {
        let m = random_structure(&mut rng(seed + i as u64), max_states, &props);
        let mut any = false;
        for (k, (f1, f2)) in pairs.iter().enumerate() {
            match (models(&m, f1), models(&m, f2)) {
                (Ok(a), Ok(b)) if a == b => any |= a,
                (a, b) => return Some(Err(format!("structure {i}, pair {k}: {a:?} vs {b:?}"))),
            }
        }
        Some(Ok(any))
    });
    Agreement::collect(results)
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusRow {
    pub name: String,
    pub formula: String,
    pub syntactic_codomain_max: u32,
    pub label_nodes: usize,
    pub tableau_codomain: Vec<u32>,
    pub witness_q: u32,
    pub millis: u128,
}

fn report_row(e: &CorpusEntry) -> Result<CorpusRow> {
    let start = Instant::now();
    let syn = minimal_priority_assignment(&e.formula)?;
    let g = build_label_graph(&e.formula)?;
    let depth = tableau_alternation_depth(&e.formula)?;
    Ok(CorpusRow {
        name: e.name.clone(),
        formula: e.formula.to_string(),
        syntactic_codomain_max: syn.codomain_max,
        label_nodes: g.len(),
        tableau_codomain: depth.codomain,
        witness_q: depth.witness_q,
        millis: start.elapsed().as_millis(),
    })
}

/// Depth facts of every corpus entry, one pipeline per entry.
pub fn corpus_report(exec: Exec) -> Vec<(String, Result<CorpusRow>)> {
    let entries = corpus();
    let rows = exec.map(&entries, report_row);
    entries.into_iter().map(|e| e.name).zip(rows).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::gen_beta;

    #[test]
    fn modes_agree_on_sweeps() {
        let a = arena_agreement(30, 5, 6, 4, Exec::Sequential);
        let b = arena_agreement(30, 5, 6, 4, Exec::Parallel);
        assert!(a.ok() && b.ok());
        assert_eq!(a.checked, b.checked);
        let g = vec![build_label_graph(&gen_beta()).unwrap()];
        let l = lasso_agreement(&g, 20, 1, 20, Exec::Parallel);
        assert!(l.ok(), "{:?}", l.disagreements);
    }
}
