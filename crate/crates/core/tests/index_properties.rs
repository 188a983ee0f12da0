use std::collections::BTreeSet;

use muforge::assign::minimized_tree;
use muforge::core_graph::core_of_twb;
use muforge::corpus::{corpus, gen_beta};
use muforge::disjunctive::{disjunctive_to_tree, reorder_decreasing, tree_to_disjunctive};
use muforge::equiv::core_equivalent;
use muforge::index::{find_max_witness, minimize, rank_priorities};
use muforge::minimal_priority_assignment;
use muforge::oracle::{cycle_sets, least_priorities, same_cycle_parities};
use muforge::random::{bisimilar_variant, random_twb, rng};
use muforge::TreeWithBackEdges;

fn small_trees(seed: u64, count: usize) -> Vec<TreeWithBackEdges> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let t = random_twb(&mut r, 14, 5);
        if cycle_sets(&t).is_ok() {
            out.push(t);
        }
    }
    out
}

fn corpus_trees() -> Vec<(String, TreeWithBackEdges)> {
    let mut out: Vec<(String, TreeWithBackEdges)> =
        corpus().iter().map(|e| (e.name.clone(), minimized_tree(&e.formula).unwrap())).collect();
    out.push(("beta-direct".into(), disjunctive_to_tree(&gen_beta()).unwrap()));
    out
}

#[test]
fn no_map_beats_the_witness() {
    let mut r = rng(1);
    let mut checked = 0;
    while checked < 60 {
        let t = random_twb(&mut r, 9, 4);
        let Ok(least) = least_priorities(&t) else { continue };
        let i = checked;
        checked += 1;
        let w = find_max_witness(&t);
        w.validate(&t).unwrap();
        assert!(least >= w.q, "tree {i}: a map into 0..={least} but q = {}", w.q);
        assert_eq!(least, w.q, "tree {i}");
    }
}

#[test]
fn minimize_matches_the_witness_on_random_trees() {
    for (i, t) in small_trees(2, 100).iter().enumerate() {
        let q = find_max_witness(t).q;
        let m = minimize(t).unwrap();
        let codomain: BTreeSet<u32> = m.priorities().into_iter().collect();
        let expected = q as usize + usize::from(codomain.contains(&0));
        assert_eq!(codomain.len(), expected, "tree {i}: {codomain:?} for q = {q}");
        assert!(same_cycle_parities(t, &m.priorities()).unwrap(), "tree {i}: a cycle changed parity");
        assert!(same_cycle_parities(t, &rank_priorities(t).priorities()).unwrap(), "tree {i}: ranking");
    }
}

#[test]
fn minimize_is_idempotent() {
    for t in small_trees(3, 50) {
        let m = minimize(&t).unwrap();
        assert_eq!(minimize(&m).unwrap(), m);
    }
    for (name, t) in corpus_trees() {
        let m = minimize(&t).unwrap();
        assert_eq!(minimize(&m).unwrap(), m, "{name}");
    }
}

#[test]
fn minimize_keeps_every_lasso_parity_on_the_corpus() {
    for (name, t) in corpus_trees() {
        let m = minimize(&t).unwrap();
        let v = core_equivalent(&core_of_twb(&t).unwrap(), &core_of_twb(&m).unwrap(), None);
        assert!(v.is_equivalent(), "{name}: {v:?}");
    }
}

#[test]
fn bisimilar_variants_keep_the_witness() {
    for (k, (name, t)) in corpus_trees().into_iter().enumerate() {
        let q = find_max_witness(&t).q;
        for i in 0..100 {
            let v = bisimilar_variant(&mut rng(7919 * k as u64 + i), &t, 3, 4 * t.len() + 40);
            assert_eq!(find_max_witness(&v).q, q, "{name} variant {i}");
        }
    }
    for (i, t) in small_trees(4, 30).into_iter().enumerate() {
        let q = find_max_witness(&t).q;
        for j in 0..20 {
            let v = bisimilar_variant(&mut rng(100 * i as u64 + j), &t, 4, 80);
            assert_eq!(find_max_witness(&v).q, q, "tree {i} variant {j}");
        }
    }
}

#[test]
fn unroll_orders_give_equal_depth() {
    // Reordering unfolds the tree and may grow exponentially; entries whose
    // own reordering is over budget are left out.
    let mut checked = 0;
    for (k, (name, t)) in corpus_trees().into_iter().enumerate() {
        let Ok(r) = reorder_decreasing(&t) else { continue };
        let want = minimal_priority_assignment(&tree_to_disjunctive(&r).unwrap()).unwrap().codomain_max;
        for i in 0..6 {
            let v = minimize(&bisimilar_variant(&mut rng(31 * k as u64 + i), &t, 2, 2 * t.len() + 20)).unwrap();
            let r = reorder_decreasing(&v).unwrap();
            assert!(r.is_ordered(), "{name} variant {i}");
            let same = core_equivalent(&core_of_twb(&v).unwrap(), &core_of_twb(&r).unwrap(), None);
            assert!(same.is_equivalent(), "{name} variant {i}: {same:?}");
            let f = tree_to_disjunctive(&r).unwrap();
            assert_eq!(minimal_priority_assignment(&f).unwrap().codomain_max, want, "{name} variant {i}");
            checked += 1;
        }
    }
    assert!(checked >= 36);
}
