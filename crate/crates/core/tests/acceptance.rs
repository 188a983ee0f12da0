//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the test
//! harness so the report is always printed; exits non-zero if any line fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use muforge::assign::{djf, minimized_tree, tableau_alternation_depth};
use muforge::core_graph::extract_core;
use muforge::corpus::{corpus, gen_alpha, gen_alpha_n, gen_beta, gen_finite, gen_simple_pair};
use muforge::disjunctive::{disjunctive_to_tree, is_disjunctive, reorder_decreasing, tree_to_disjunctive};
use muforge::equiv::{core_equivalent, formulas_equivalent};
use muforge::index::{find_max_witness, minimize, reduce_priorities, Reduction};
use muforge::par::Exec;
use muforge::random::{bisimilar_variant, rng};
use muforge::sweep::{arena_agreement, lasso_agreement, models_agreement};
use muforge::tableau::build_label_graph;
use muforge::{minimal_priority_assignment, parse_formula, Formula};

const SECOND: Duration = Duration::from_secs(1);

type Check = Result<String, String>;

struct Report {
    failed: usize,
}

impl Report {
    fn run(&mut self, id: u32, name: &str, limit: Duration, check: impl FnOnce() -> Check) {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let timing = format!("{:.2}s of {}s", took.as_secs_f64(), limit.as_secs());
        let (ok, detail) = match outcome {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over the time limit")),
            Err(d) => (false, d),
        };
        if !ok {
            self.failed += 1;
        }
        println!("{} {id}. {name} [{timing}] {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn codomain_max(f: &Formula) -> Result<u32, String> {
    minimal_priority_assignment(f).map(|a| a.codomain_max).map_err(|e| e.to_string())
}

fn equivalent(f1: &Formula, f2: &Formula) -> Result<bool, String> {
    let c1 = extract_core(&build_label_graph(f1).map_err(|e| e.to_string())?);
    let c2 = extract_core(&build_label_graph(f2).map_err(|e| e.to_string())?);
    Ok(core_equivalent(&c1, &c2, None).is_equivalent())
}

fn depth_facts() -> Check {
    let a = codomain_max(&gen_alpha())?;
    let b = codomain_max(&gen_beta())?;
    ensure(a == 1 && b == 3, || format!("alpha 0..={a}, beta 0..={b}"))?;
    Ok("alpha {0,1}, beta {0..3}".into())
}

fn tableau_equivalence() -> Check {
    let limit = 10 * SECOND;
    let mut parts = Vec::new();
    let (d, p) = gen_simple_pair();
    let excluded = parse_formula("p | ~p").map_err(|e| e.to_string())?;
    for (name, f1, f2, want) in
        [("alpha~beta", gen_alpha(), gen_beta(), true), ("simple pair", d, p, true), ("p|~p vs tt", excluded, Formula::Top, false)]
    {
        let start = Instant::now();
        let got = equivalent(&f1, &f2)?;
        let took = start.elapsed();
        ensure(got == want, || format!("{name}: got {got}"))?;
        ensure(took <= limit, || format!("{name}: {took:?}"))?;
        parts.push(format!("{name}={got}"));
    }
    Ok(parts.join(", "))
}

fn witness_lower_bound() -> Check {
    let t = minimized_tree(&gen_beta()).map_err(|e| e.to_string())?;
    let w = find_max_witness(&t);
    w.validate(&t)?;
    let r = reduce_priorities(&t).map_err(|e| e.to_string())?;
    ensure(w.q == 3, || format!("q = {}", w.q))?;
    ensure(matches!(r, Reduction::Irreducible(_)), || "reducible".into())?;
    Ok("q = 3, irreducible".into())
}

fn alpha_n(n: usize) -> Check {
    let f = gen_alpha_n(n).map_err(|e| e.to_string())?;
    let syn = codomain_max(&f)?;
    let d = tableau_alternation_depth(&f).map_err(|e| e.to_string())?;
    ensure(syn == 1, || format!("syntactic 0..={syn}"))?;
    ensure(d.nonzero() == 2 * n + 1, || format!("{} non-zero priorities, want {}", d.nonzero(), 2 * n + 1))?;
    ensure(d.witness_q as usize == 2 * n + 1, || format!("witness q = {}", d.witness_q))?;
    Ok(format!("n={n}: {} non-zero tableau priorities, syntactic {{0,1}}", d.nonzero()))
}

fn nu_elimination() -> Check {
    let d = djf(&gen_finite(&gen_alpha()).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(!d.has_nu(), || format!("nu binder in {d}"))?;
    ensure(is_disjunctive(&d), || format!("not disjunctive: {d}"))?;
    Ok(format!("nu-free disjunctive formula of size {}", d.size()))
}

fn variants_keep_codomain() -> Check {
    const VARIANTS: u64 = 100;
    let mut checked = 0;
    for (k, e) in corpus().iter().enumerate() {
        let t = minimized_tree(&e.formula).map_err(|err| format!("{}: {err}", e.name))?;
        let want = t.max_priority();
        let sizes = Exec::Parallel.map_range(VARIANTS as usize, |i| {
            let v = bisimilar_variant(&mut rng(1000 * k as u64 + i as u64), &t, 3, 4 * t.len() + 40);
            minimize(&v).map(|m| m.max_priority()).map_err(|err| err.to_string())
        });
        for (i, s) in sizes.into_iter().enumerate() {
            let s = s?;
            ensure(s == want, || format!("{} variant {i}: 0..={s}, tree 0..={want}", e.name))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} variants, zero violations"))
}

fn oracle_lassos() -> Check {
    let graphs: Result<Vec<_>, _> = corpus().iter().map(|e| build_label_graph(&e.formula)).collect();
    let a = lasso_agreement(&graphs.map_err(|e| e.to_string())?, 500, 7, 20, Exec::Parallel);
    ensure(a.checked >= 500 && a.ok(), || format!("{} checked, {:?}", a.checked, a.disagreements.first()))?;
    Ok(format!("{} lassos ({} with a mu-trace), zero disagreements", a.checked, a.positive))
}

fn oracle_arenas() -> Check {
    let a = arena_agreement(200, 11, 8, 4, Exec::Parallel);
    ensure(a.checked >= 200 && a.ok(), || format!("{} checked, {:?}", a.checked, a.disagreements.first()))?;
    Ok(format!("{} arenas, identical regions", a.checked))
}

fn oracle_models() -> Check {
    let pairs = vec![(gen_alpha(), gen_beta()), gen_simple_pair()];
    let a = models_agreement(&pairs, 200, 13, 6, Exec::Parallel);
    ensure(a.checked >= 200 && a.ok(), || format!("{} checked, {:?}", a.checked, a.disagreements.first()))?;
    Ok(format!("{} structures ({} satisfying some formula), zero disagreements", a.checked, a.positive))
}

fn round_trip() -> Check {
    let mut names = Vec::new();
    for e in corpus().iter().filter(|e| e.disjunctive) {
        let fail = |err: muforge::Error| format!("{}: {err}", e.name);
        let t = disjunctive_to_tree(&e.formula).map_err(fail)?;
        let back = tree_to_disjunctive(&reorder_decreasing(&t).map_err(fail)?).map_err(fail)?;
        let eq = formulas_equivalent(&e.formula, &back, None).map_err(fail)?;
        ensure(eq.is_equivalent(), || format!("{}: not equivalent after round trip", e.name))?;
        let (before, after) = (codomain_max(&e.formula)?, codomain_max(&back)?);
        ensure(before == after, || format!("{}: depth 0..={before} became 0..={after}", e.name))?;
        names.push(e.name.clone());
    }
    Ok(format!("{} preserved", names.join(", ")))
}

fn main() -> ExitCode {
    let worker = std::thread::Builder::new().stack_size(256 << 20).spawn(|| {
        let mut r = Report { failed: 0 };
        r.run(1, "depth facts", SECOND, depth_facts);
        r.run(2, "tableau equivalence", 30 * SECOND, tableau_equivalence);
        r.run(3, "witness lower bound", 5 * SECOND, witness_lower_bound);
        r.run(4, "alpha_n blow-up, n = 1", 10 * SECOND, || alpha_n(1));
        r.run(4, "alpha_n blow-up, n = 2", 120 * SECOND, || alpha_n(2));
        r.run(5, "nu-elimination", 30 * SECOND, nu_elimination);
        r.run(6, "bisimilar variants keep the co-domain", 600 * SECOND, variants_keep_codomain);
        r.run(7, "(a) lasso oracle", 600 * SECOND, oracle_lassos);
        r.run(7, "(b) parity game oracle", 600 * SECOND, oracle_arenas);
        r.run(7, "(c) models spot check", 600 * SECOND, oracle_models);
        r.run(8, "disjunctive round trip", 600 * SECOND, round_trip);
        r.failed
    });
    let failed = worker.expect("spawn").join().expect("acceptance run");
    println!("{} criteria lines failed", failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
