use muforge::assign::{djf, minimized_tree};
use muforge::disjunctive::{is_disjunctive, tree_sat};
use muforge::game::models;
use muforge::random::{random_formula, random_structure, random_twb, rng};
use muforge::{parse_formula, parse_structure, parse_twb, print_formula, print_structure, print_twb, Error};
use proptest::prelude::*;

const PROPS: [&str; 3] = ["p", "q", "r"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn formulas_print_and_parse_back(seed in any::<u64>(), depth in 0usize..6) {
        let f = random_formula(&mut rng(seed), depth, &PROPS);
        let text = print_formula(&f);
        prop_assert_eq!(parse_formula(&text).unwrap(), f, "{}", text);
    }

    #[test]
    fn structures_print_and_parse_back(seed in any::<u64>()) {
        let m = random_structure(&mut rng(seed), 6, &PROPS);
        let text = print_structure(&m);
        prop_assert_eq!(parse_structure(&text).unwrap(), m, "{}", text);
    }

    #[test]
    fn trees_print_and_parse_back(seed in any::<u64>()) {
        let t = random_twb(&mut rng(seed), 20, 4);
        let text = print_twb(&t);
        prop_assert_eq!(parse_twb(&text).unwrap().canonical(), t.canonical(), "{}", text);
    }
}

#[test]
fn djf_keeps_models() {
    let mut done = 0;
    for seed in 0..60 {
        let f = random_formula(&mut rng(seed), 4, &PROPS);
        let d = match djf(&f) {
            Ok(d) => d,
            Err(Error::Budget(_)) => continue,
            Err(e) => panic!("{f}: {e}"),
        };
        assert!(is_disjunctive(&d), "{f} gave {d}");
        for s in 0..15 {
            let m = random_structure(&mut rng(1000 * seed + s), 5, &PROPS);
            assert_eq!(models(&m, &f).unwrap(), models(&m, &d).unwrap(), "{f} vs {d} on\n{}", print_structure(&m));
        }
        done += 1;
    }
    assert!(done >= 40, "only {done} formulas within budget");
}

#[test]
fn models_imply_tree_sat() {
    for seed in 0..80 {
        let f = random_formula(&mut rng(seed), 4, &PROPS);
        let Ok(t) = minimized_tree(&f) else { continue };
        let sat = tree_sat(&t);
        for s in 0..15 {
            let m = random_structure(&mut rng(7 * seed + s), 5, &PROPS);
            if models(&m, &f).unwrap() {
                assert!(sat, "{f} has a model but its tree is unsatisfiable");
                break;
            }
        }
    }
}
