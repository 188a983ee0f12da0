//! Positive-form, uni-modal mu-calculus formulas with the `->B` modality.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// A formula in positive form. Negation only occurs on propositions.
///
/// `Modal(B)` holds iff every member of `B` holds in some successor and every
/// successor satisfies some member of `B`. `Modal(∅)` therefore means "no
/// successors". Sets are ordered by the derived structural order, so equal
/// formulas always compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Top,
    Bottom,
    Prop(String),
    NegProp(String),
    Var(String),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Modal(BTreeSet<Formula>),
    Mu(String, Box<Formula>),
    Nu(String, Box<Formula>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FixKind {
    Mu,
    Nu,
}

impl FixKind {
    /// Parity a priority of this binder must have (0 = even).
    pub fn parity(self) -> u32 {
        match self {
            FixKind::Mu => 1,
            FixKind::Nu => 0,
        }
    }

    pub fn for_priority(p: u32) -> FixKind {
        if p.is_multiple_of(2) {
            FixKind::Nu
        } else {
            FixKind::Mu
        }
    }
}

/// Literal decorating modal nodes and leaves. `False` records a `ff` in a label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Literal {
    Pos(String),
    Neg(String),
    False,
}

impl Literal {
    pub fn to_formula(&self) -> Formula {
        match self {
            Literal::Pos(p) => Formula::Prop(p.clone()),
            Literal::Neg(p) => Formula::NegProp(p.clone()),
            Literal::False => Formula::Bottom,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Pos(p) => write!(f, "{p}"),
            Literal::Neg(p) => write!(f, "~{p}"),
            Literal::False => write!(f, "ff"),
        }
    }
}

pub fn literals_consistent(lits: &BTreeSet<Literal>) -> bool {
    lits.iter().all(|l| match l {
        Literal::False => false,
        Literal::Pos(p) => !lits.contains(&Literal::Neg(p.clone())),
        Literal::Neg(_) => true,
    })
}

impl Formula {
    pub fn prop(p: &str) -> Formula {
        Formula::Prop(p.to_string())
    }

    pub fn neg(p: &str) -> Formula {
        Formula::NegProp(p.to_string())
    }

    pub fn var(x: &str) -> Formula {
        Formula::Var(x.to_string())
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn modal<I: IntoIterator<Item = Formula>>(members: I) -> Formula {
        Formula::Modal(members.into_iter().collect())
    }

    pub fn mu(x: &str, body: Formula) -> Formula {
        Formula::Mu(x.to_string(), Box::new(body))
    }

    pub fn nu(x: &str, body: Formula) -> Formula {
        Formula::Nu(x.to_string(), Box::new(body))
    }

    pub fn fix(kind: FixKind, x: &str, body: Formula) -> Formula {
        match kind {
            FixKind::Mu => Formula::mu(x, body),
            FixKind::Nu => Formula::nu(x, body),
        }
    }

    /// `<>f`, encoded as `->{f, tt}`.
    pub fn diamond(f: Formula) -> Formula {
        Formula::modal([f, Formula::Top])
    }

    /// `[]f`, encoded as `->{f} | ->{}`.
    pub fn boxed(f: Formula) -> Formula {
        Formula::or(Formula::modal([f]), Formula::modal([]))
    }

    /// Left-nested conjunction; `tt` for an empty iterator.
    pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::Top)
    }

    /// Left-nested disjunction; `ff` for an empty iterator.
    pub fn disj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::Bottom)
    }

    /// Immediate subformulas in path order.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::And(a, b) | Formula::Or(a, b) => vec![a, b],
            Formula::Modal(bs) => bs.iter().collect(),
            Formula::Mu(_, b) | Formula::Nu(_, b) => vec![b],
            _ => Vec::new(),
        }
    }

    pub fn binder(&self) -> Option<(FixKind, &str, &Formula)> {
        match self {
            Formula::Mu(x, b) => Some((FixKind::Mu, x, b)),
            Formula::Nu(x, b) => Some((FixKind::Nu, x, b)),
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        collect_free(self, &mut Vec::new(), &mut out);
        out
    }

    /// Every fixpoint binding subformula, innermost first (post-order).
    pub fn binders(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        collect_binders(self, &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn has_nu(&self) -> bool {
        match self {
            Formula::Nu(..) => true,
            _ => self.children().iter().any(|c| c.has_nu()),
        }
    }

    /// Renames binders so that every binder name is distinct and differs from
    /// every free variable. Names already unique are kept.
    pub fn alpha_normalize(&self) -> Formula {
        let mut taken = self.free_vars();
        rename_unique(self, &mut Vec::new(), &mut taken)
    }

    /// Representative of the alpha-equivalence class: bound variables are
    /// renamed after their binder nesting depth.
    pub fn alpha_canonical(&self) -> Formula {
        canonical(self, &mut Vec::new())
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        self.alpha_canonical() == other.alpha_canonical()
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match f {
        Formula::Var(x) => {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.clone());
            }
        }
        Formula::Mu(x, b) | Formula::Nu(x, b) => {
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        _ => {
            for c in f.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

fn collect_binders<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    for c in f.children() {
        collect_binders(c, out);
    }
    if f.binder().is_some() {
        out.push(f);
    }
}

fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken.contains(n))
        .expect("unbounded name supply")
}

fn rename_unique(
    f: &Formula,
    env: &mut Vec<(String, String)>,
    taken: &mut BTreeSet<String>,
) -> Formula {
    match f {
        Formula::Var(x) => match env.iter().rev().find(|(old, _)| old == x) {
            Some((_, new)) => Formula::Var(new.clone()),
            None => f.clone(),
        },
        Formula::Mu(x, b) | Formula::Nu(x, b) => {
            let name = if taken.contains(x) {
                fresh_name(x, taken)
            } else {
                x.clone()
            };
            taken.insert(name.clone());
            env.push((x.clone(), name.clone()));
            let body = rename_unique(b, env, taken);
            env.pop();
            match f {
                Formula::Mu(..) => Formula::Mu(name, Box::new(body)),
                _ => Formula::Nu(name, Box::new(body)),
            }
        }
        Formula::And(a, b) => Formula::and(rename_unique(a, env, taken), rename_unique(b, env, taken)),
        Formula::Or(a, b) => Formula::or(rename_unique(a, env, taken), rename_unique(b, env, taken)),
        Formula::Modal(bs) => Formula::Modal(bs.iter().map(|m| rename_unique(m, env, taken)).collect()),
        _ => f.clone(),
    }
}

fn canonical(f: &Formula, env: &mut Vec<String>) -> Formula {
    match f {
        Formula::Var(x) => match env.iter().rposition(|b| b == x) {
            Some(level) => Formula::Var(format!("V{level}")),
            None => f.clone(),
        },
        Formula::Mu(x, b) | Formula::Nu(x, b) => {
            let name = format!("V{}", env.len());
            env.push(x.clone());
            let body = canonical(b, env);
            env.pop();
            match f {
                Formula::Mu(..) => Formula::Mu(name, Box::new(body)),
                _ => Formula::Nu(name, Box::new(body)),
            }
        }
        Formula::And(a, b) => Formula::and(canonical(a, env), canonical(b, env)),
        Formula::Or(a, b) => Formula::or(canonical(a, env), canonical(b, env)),
        Formula::Modal(bs) => Formula::Modal(bs.iter().map(|m| canonical(m, env)).collect()),
        _ => f.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "var", rename_all = "snake_case")]
pub enum DiagnosticKind {
    FreeVariable(String),
    UnguardedVariable(String),
    DuplicateBinder(String),
}

/// A well-formedness violation; `path` lists child indices from the root
/// (`Modal` members are indexed in set order).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub path: Vec<usize>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        let at = if path.is_empty() { "root".to_string() } else { path.join(".") };
        match &self.kind {
            DiagnosticKind::FreeVariable(x) => write!(f, "free variable {x} at {at}"),
            DiagnosticKind::UnguardedVariable(x) => write!(f, "unguarded occurrence of {x} at {at}"),
            DiagnosticKind::DuplicateBinder(x) => write!(f, "binder {x} declared twice (at {at})"),
        }
    }
}

/// Closedness, guardedness and binder uniqueness. Empty means well formed.
pub fn validate(f: &Formula) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    validate_rec(f, &mut Vec::new(), &mut Vec::new(), &mut seen, &mut out);
    out
}

fn validate_rec(
    f: &Formula,
    env: &mut Vec<(String, bool)>,
    path: &mut Vec<usize>,
    seen: &mut BTreeSet<String>,
    out: &mut Vec<Diagnostic>,
) {
    match f {
        Formula::Var(x) => match env.iter().rev().find(|(b, _)| b == x) {
            None => out.push(Diagnostic {
                kind: DiagnosticKind::FreeVariable(x.clone()),
                path: path.clone(),
            }),
            Some((_, false)) => out.push(Diagnostic {
                kind: DiagnosticKind::UnguardedVariable(x.clone()),
                path: path.clone(),
            }),
            Some(_) => {}
        },
        Formula::Mu(x, b) | Formula::Nu(x, b) => {
            if !seen.insert(x.clone()) {
                out.push(Diagnostic {
                    kind: DiagnosticKind::DuplicateBinder(x.clone()),
                    path: path.clone(),
                });
            }
            env.push((x.clone(), false));
            path.push(0);
            validate_rec(b, env, path, seen, out);
            path.pop();
            env.pop();
        }
        Formula::Modal(bs) => {
            let mut guarded: Vec<(String, bool)> = env.iter().map(|(x, _)| (x.clone(), true)).collect();
            for (i, m) in bs.iter().enumerate() {
                path.push(i);
                validate_rec(m, &mut guarded, path, seen, out);
                path.pop();
            }
        }
        _ => {
            for (i, c) in f.children().into_iter().enumerate() {
                path.push(i);
                validate_rec(c, env, path, seen, out);
                path.pop();
            }
        }
    }
}

pub(crate) fn ensure_well_formed(f: &Formula) -> Result<()> {
    let diags = validate(f);
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Error::IllFormed(diags))
    }
}

/// Map from fixpoint variables to priorities in `{0..codomain_max}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PriorityAssignment {
    pub entries: BTreeMap<String, u32>,
    pub codomain_max: u32,
}

impl PriorityAssignment {
    pub fn get(&self, var: &str) -> Option<u32> {
        self.entries.get(var).copied()
    }

    pub fn codomain(&self) -> Vec<u32> {
        (0..=self.codomain_max).collect()
    }

    /// Checks parity, the dependency order and surjectivity onto `{1..n}`.
    pub fn check(&self, f: &Formula) -> std::result::Result<(), String> {
        let binders = f.binders();
        for b in &binders {
            let (kind, x, _) = b.binder().expect("binder");
            let p = self.get(x).ok_or_else(|| format!("{x} has no priority"))?;
            if p % 2 != kind.parity() {
                return Err(format!("{x} has priority {p} of the wrong parity"));
            }
            for y in b.free_vars() {
                if let Some(q) = self.get(&y) {
                    if q < p {
                        return Err(format!("{y} ({q}) is free in the binding of {x} ({p})"));
                    }
                }
            }
        }
        let used: BTreeSet<u32> = self.entries.values().copied().collect();
        if let Some(k) = (1..=self.codomain_max).find(|k| !used.contains(k)) {
            return Err(format!("priority {k} is unused"));
        }
        if used.iter().any(|&p| p > self.codomain_max) {
            return Err("priority above co-domain".into());
        }
        Ok(())
    }
}

/// Lowers priorities so that `{1..max}` is covered: whenever a priority `k >= 1`
/// is unused, every greater priority drops by 2.
pub fn compact_priorities(values: &mut [u32]) {
    loop {
        let used: BTreeSet<u32> = values.iter().copied().collect();
        let max = used.iter().next_back().copied().unwrap_or(0);
        let Some(gap) = (1..max).find(|k| !used.contains(k)) else {
            break;
        };
        for v in values.iter_mut() {
            if *v > gap {
                *v -= 2;
            }
        }
    }
}

/// Least priority assignment. Binders are visited innermost first; each gets
/// the least value of its parity that is at least the priority of every inner
/// binder in whose binding formula it occurs free.
pub fn minimal_priority_assignment(f: &Formula) -> Result<PriorityAssignment> {
    ensure_well_formed(f)?;
    let mut entries: BTreeMap<String, u32> = BTreeMap::new();
    let binders = f.binders();
    let free: Vec<BTreeSet<String>> = binders.iter().map(|b| b.free_vars()).collect();
    for (i, b) in binders.iter().enumerate() {
        let (kind, x, _) = b.binder().expect("binder");
        // Binders before `i` in post-order that lie inside `b` are exactly the
        // ones already assigned whose binding mentions `x` freely.
        let lower = binders[..i]
            .iter()
            .zip(&free[..i])
            .filter(|(_, fv)| fv.contains(x))
            .map(|(z, _)| entries[z.binder().expect("binder").1])
            .max()
            .unwrap_or(0);
        let p = if lower % 2 == kind.parity() { lower } else { lower + 1 };
        entries.insert(x.to_string(), p);
    }
    let names: Vec<String> = entries.keys().cloned().collect();
    let mut values: Vec<u32> = names.iter().map(|n| entries[n]).collect();
    compact_priorities(&mut values);
    let entries: BTreeMap<String, u32> = names.into_iter().zip(values).collect();
    let codomain_max = entries.values().copied().max().unwrap_or(0);
    Ok(PriorityAssignment { entries, codomain_max })
}

fn fits(f: &Formula, prio: impl Fn(FixKind) -> u32) -> bool {
    f.binders().iter().all(|b| {
        let (kind, _, _) = b.binder().expect("binder");
        let p = prio(kind);
        b.free_vars().iter().all(|y| match binder_kind(f, y) {
            Some(k) => prio(k) >= p,
            None => true,
        })
    })
}

fn binder_kind(f: &Formula, x: &str) -> Option<FixKind> {
    f.binders()
        .into_iter()
        .filter_map(|b| b.binder())
        .find(|(_, y, _)| *y == x)
        .map(|(k, _, _)| k)
}

/// True iff the formula admits an assignment into `{0,1}` and one into
/// `{1,2}` (priority 0 unused).
pub fn is_alternation_free(f: &Formula) -> Result<bool> {
    ensure_well_formed(f)?;
    let low = fits(f, |k| match k {
        FixKind::Nu => 0,
        FixKind::Mu => 1,
    });
    let high = fits(f, |k| match k {
        FixKind::Nu => 2,
        FixKind::Mu => 1,
    });
    Ok(low && high)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&p("mu X. ->{X}")).is_empty());
        let d = validate(&Formula::mu("X", Formula::var("X")));
        assert_eq!(d[0].kind, DiagnosticKind::UnguardedVariable("X".into()));
        let d = validate(&Formula::mu(
            "X",
            Formula::and(Formula::var("X"), Formula::modal([Formula::var("X")])),
        ));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, vec![0, 0]);
        let d = validate(&Formula::var("X"));
        assert_eq!(d[0].kind, DiagnosticKind::FreeVariable("X".into()));
        let dup = Formula::and(
            Formula::mu("X", Formula::modal([Formula::var("X")])),
            Formula::mu("X", Formula::modal([Formula::var("X")])),
        );
        assert!(validate(&dup)
            .iter()
            .any(|d| d.kind == DiagnosticKind::DuplicateBinder("X".into())));
    }

    #[test]
    fn free_vars_examples() {
        assert_eq!(Formula::var("X").free_vars(), BTreeSet::from(["X".to_string()]));
        assert!(p("mu X. ->{X}").free_vars().is_empty());
        let f = Formula::nu("Y", Formula::and(Formula::var("X"), Formula::modal([Formula::var("Y")])));
        assert_eq!(f.free_vars(), BTreeSet::from(["X".to_string()]));
    }

    #[test]
    fn single_mu_gets_one() {
        let a = minimal_priority_assignment(&p("mu X. ->{X}")).unwrap();
        assert_eq!(a.get("X"), Some(1));
        assert_eq!(a.codomain_max, 1);
    }

    #[test]
    fn rejects_open_input() {
        assert!(minimal_priority_assignment(&Formula::var("X")).is_err());
        assert!(is_alternation_free(&Formula::mu("X", Formula::var("X"))).is_err());
    }

    #[test]
    fn alternation_free_examples() {
        assert!(is_alternation_free(&p("nu Y. ->{Y} & mu X. (~a & ->{X}) | a")).unwrap());
        assert!(!is_alternation_free(&p("nu X. mu Y. (a & ->{X}) | (~a & ->{Y})")).unwrap());
        assert!(is_alternation_free(&p("a")).unwrap());
    }

    #[test]
    fn compaction_closes_gaps() {
        let mut v = vec![0, 3, 5];
        compact_priorities(&mut v);
        assert_eq!(v, vec![0, 1, 1]);
        let mut v = vec![4, 2];
        compact_priorities(&mut v);
        assert_eq!(v, vec![0, 0]);
    }

    #[test]
    fn alpha_normalize_separates_binders() {
        let dup = Formula::and(
            Formula::mu("X", Formula::modal([Formula::var("X")])),
            Formula::mu("X", Formula::modal([Formula::var("X")])),
        );
        let n = dup.alpha_normalize();
        assert!(validate(&n).is_empty());
        assert!(n.alpha_eq(&dup));
    }
}
