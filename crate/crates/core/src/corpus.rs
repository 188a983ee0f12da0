//! The worked examples as formula generators, with the facts expected of them.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{ensure_well_formed, Formula};

fn p(name: &str) -> Formula {
    Formula::prop(name)
}

fn step(lit: Formula, x: &str) -> Formula {
    Formula::and(lit, Formula::modal([Formula::var(x)]))
}

/// A simple pair: a disjunctive one with one
/// alternation, and an alternation-free non-disjunctive twin.
pub fn gen_simple_pair() -> (Formula, Formula) {
    let disjunctive = Formula::nu(
        "X",
        Formula::mu("Y", Formula::or(step(p("a"), "X"), step(Formula::neg("a"), "Y"))),
    );
    let plain = Formula::nu(
        "Y",
        Formula::and(
            Formula::modal([Formula::var("Y")]),
            Formula::mu("X", Formula::or(step(Formula::neg("a"), "X"), p("a"))),
        ),
    );
    (disjunctive, plain)
}

/// `mu X. nu Y. (a & ->{X}) | (b & ->{Y}) [| e]`, with `inner` conjoined under
/// the binders when given.
fn clause(x: &str, y: &str, a: &str, b: &str, e: Option<&str>, inner: Option<Formula>) -> Formula {
    let mut body = Formula::or(step(p(a), x), step(p(b), y));
    if let Some(e) = e {
        body = Formula::or(body, p(e));
    }
    if let Some(inner) = inner {
        body = Formula::and(body, inner);
    }
    Formula::mu(x, Formula::nu(y, body))
}

pub fn gen_alpha() -> Formula {
    let inner = clause("X1", "Y1", "c", "d", Some("e"), None);
    clause("X0", "Y0", "a", "b", None, Some(inner))
}

pub fn gen_beta() -> Formula {
    let arm = |l1: &str, l2: &str, x: &str| {
        Formula::and(Formula::and(p(l1), p(l2)), Formula::modal([Formula::var(x)]))
    };
    let body = Formula::disj([
        arm("a", "c", "X0"),
        arm("a", "d", "X0"),
        arm("a", "e", "X0"),
        arm("b", "e", "Y0"),
        arm("b", "c", "X1"),
        arm("b", "d", "Y1"),
    ]);
    Formula::mu("X0", Formula::nu("Y0", Formula::mu("X1", Formula::nu("Y1", body))))
}

/// The family generalising `gen_alpha`: clauses `n` (without `e`) down to 0,
/// each conjoined beneath the binders of the previous one.
pub fn gen_alpha_n(n: usize) -> Result<Formula> {
    if n < 1 {
        return Err(Error::Invalid("alpha_n needs n >= 1".into()));
    }
    let mut f: Option<Formula> = None;
    for i in 0..=n {
        let (x, y) = (format!("X{i}"), format!("Y{i}"));
        let (a, b, e) = (format!("a{i}"), format!("b{i}"), format!("e{i}"));
        let e = (i < n).then_some(e.as_str());
        f = Some(clause(&x, &y, &a, &b, e, f.take()));
    }
    Ok(f.expect("n >= 1"))
}

/// `(mu X. ->{X} | ->{}) & psi`.
pub fn gen_finite(psi: &Formula) -> Result<Formula> {
    ensure_well_formed(psi)?;
    let fin = Formula::mu("F", Formula::or(Formula::modal([Formula::var("F")]), Formula::modal([])));
    let f = Formula::and(fin, psi.clone()).alpha_normalize();
    ensure_well_formed(&f)?;
    Ok(f)
}

/// A fact expected of a corpus formula and where it comes from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expectation {
    pub value: serde_json::Value,
    pub source: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusEntry {
    pub name: String,
    #[serde(serialize_with = "as_text")]
    pub formula: Formula,
    pub disjunctive: bool,
    pub expected: BTreeMap<&'static str, Expectation>,
}

fn as_text<S: serde::Serializer>(f: &Formula, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&f.to_string())
}

fn expect(value: serde_json::Value, source: &'static str) -> Expectation {
    Expectation { value, source }
}

/// Every named formula with its expected facts.
pub fn corpus() -> Vec<CorpusEntry> {
    use serde_json::json;
    let (simple_d, simple_p) = gen_simple_pair();
    let mut out = vec![
        CorpusEntry {
            name: "simple-disjunctive".into(),
            formula: simple_d,
            disjunctive: true,
            expected: BTreeMap::from([
                ("syntactic_codomain_max", expect(json!(2), "mu over nu")),
                ("alternation_free", expect(json!(false), "mu over nu")),
                ("equivalent_to", expect(json!("simple-plain"), "same tableau core")),
            ]),
        },
        CorpusEntry {
            name: "simple-plain".into(),
            formula: simple_p,
            disjunctive: false,
            expected: BTreeMap::from([
                ("alternation_free", expect(json!(true), "no mu/nu dependency")),
                ("tableau_codomain_max", expect(json!(2), "same as its disjunctive twin")),
            ]),
        },
        CorpusEntry {
            name: "alpha".into(),
            formula: gen_alpha(),
            disjunctive: false,
            expected: BTreeMap::from([
                ("syntactic_codomain_max", expect(json!(1), "one alternation")),
                ("tableau_codomain_max", expect(json!(3), "mu nu mu nu chain")),
                ("equivalent_to", expect(json!("beta"), "same tableau core")),
                ("modal_fanout", expect(json!(6), "six modal branches")),
            ]),
        },
        CorpusEntry {
            name: "beta".into(),
            formula: gen_beta(),
            disjunctive: true,
            expected: BTreeMap::from([
                ("syntactic_codomain_max", expect(json!(3), "mu nu mu nu chain")),
                ("witness_q", expect(json!(3), "oracle: nested strongly connected subsets")),
            ]),
        },
    ];
    for n in 1..=2 {
        out.push(CorpusEntry {
            name: format!("alpha-{n}"),
            formula: gen_alpha_n(n).expect("n >= 1"),
            disjunctive: false,
            expected: BTreeMap::from([
                ("syntactic_codomain_max", expect(json!(1), "one alternation")),
                ("tableau_nonzero_priorities", expect(json!(2 * n + 1), "witness of length 2n+1")),
                ("modal_fanout", expect(json!(2 * 3usize.pow(n as u32)), "2*3^n modal nodes")),
            ]),
        });
    }
    out.push(CorpusEntry {
        name: "finite-alpha".into(),
        formula: gen_finite(&gen_alpha()).expect("alpha is well formed"),
        disjunctive: false,
        expected: BTreeMap::from([("nu_free_representative", expect(json!(true), "finite paths need no nu"))]),
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{is_alternation_free, minimal_priority_assignment};

    fn rename(f: &Formula, map: &BTreeMap<&str, &str>) -> Formula {
        match f {
            Formula::Prop(q) => Formula::prop(map.get(q.as_str()).copied().unwrap_or(q)),
            Formula::NegProp(q) => Formula::neg(map.get(q.as_str()).copied().unwrap_or(q)),
            Formula::And(a, b) => Formula::and(rename(a, map), rename(b, map)),
            Formula::Or(a, b) => Formula::or(rename(a, map), rename(b, map)),
            Formula::Modal(bs) => Formula::modal(bs.iter().map(|m| rename(m, map))),
            Formula::Mu(x, b) => Formula::mu(x, rename(b, map)),
            Formula::Nu(x, b) => Formula::nu(x, rename(b, map)),
            _ => f.clone(),
        }
    }

    #[test]
    fn depth_facts() {
        assert_eq!(minimal_priority_assignment(&gen_alpha()).unwrap().codomain_max, 1);
        assert_eq!(minimal_priority_assignment(&gen_beta()).unwrap().codomain_max, 3);
        for n in 1..=3 {
            assert_eq!(minimal_priority_assignment(&gen_alpha_n(n).unwrap()).unwrap().codomain_max, 1);
        }
        let (d, p) = gen_simple_pair();
        assert!(is_alternation_free(&p).unwrap());
        assert!(!is_alternation_free(&d).unwrap());
    }

    #[test]
    fn alpha_one_is_alpha() {
        let map = BTreeMap::from([("a1", "a"), ("b1", "b"), ("a0", "c"), ("b0", "d"), ("e0", "e")]);
        let a1 = rename(&gen_alpha_n(1).unwrap(), &map);
        assert!(a1.alpha_eq(&gen_alpha()));
        assert!(gen_alpha_n(0).is_err());
    }

    #[test]
    fn finite_wrapper_is_closed() {
        let f = gen_finite(&Formula::Top).unwrap();
        assert!(f.is_closed());
        assert!(gen_finite(&Formula::var("Z")).is_err());
    }
}
