//! `muforge`: command-line front end.
//!
//! Inputs are file paths or inline text; `-` reads stdin. Exit codes: 0
//! success or true, 1 false, 2 usage, 3 parse error, 4 budget exceeded.

use std::io::Read;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use muforge::assign::{assign_node_priorities, djf, minimized_tree};
use muforge::core_graph::extract_core;
use muforge::corpus::{gen_alpha, gen_alpha_n, gen_beta, gen_finite, gen_simple_pair};
use muforge::disjunctive::{is_disjunctive, tree_sat};
use muforge::equiv::{core_equivalent, Verdict};
use muforge::game::models;
use muforge::index::{find_max_witness, minimize, Witness};
use muforge::par::Exec;
use muforge::sweep::{corpus_report, lasso_agreement};
use muforge::tableau::build_label_graph;
use muforge::{
    minimal_priority_assignment, parse_formula, parse_structure, parse_twb, print_twb, Error, Formula, ToDot,
    TreeWithBackEdges,
};

/// Largest alpha_n generated without --allow-large.
const ALPHA_N_CAP: usize = 4;

#[derive(Parser)]
#[command(name = "muforge", version, about = "Tableaux, disjunctive form and alternation depth for the modal mu-calculus")]
struct Cli {
    /// Machine-readable output, one JSON object per line.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and pretty-print a formula.
    Parse { formula: String },
    /// Minimal syntactic priority assignment.
    Depth { formula: String },
    /// The label graph of the tableau.
    Graph {
        formula: String,
        #[arg(long)]
        dot: bool,
    },
    /// The tableau core.
    Core {
        formula: String,
        #[arg(long)]
        dot: bool,
    },
    /// Tableau equivalence of two formulas.
    Equiv {
        left: String,
        right: String,
        /// Lasso length bound (default: derived from the product size).
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Tree with back edges and node priorities for the tableau core.
    Tree {
        formula: String,
        #[arg(long)]
        dot: bool,
    },
    /// Minimize the priorities of a tree (a .twb input or a formula).
    Minimize {
        input: String,
        #[arg(long)]
        dot: bool,
    },
    /// Longest witness of a tree (a .twb input or a formula).
    Witness { input: String },
    /// Disjunctive formula with the least alternation depth.
    Djf { formula: String },
    /// Satisfiability.
    Sat { formula: String },
    /// Model checking: does the structure satisfy the formula?
    Mc { structure: String, formula: String },
    /// Print a formula of the built-in families.
    Gen {
        #[command(subcommand)]
        family: Family,
    },
    /// Cross-checks against brute-force oracles.
    Oracle {
        #[command(subcommand)]
        check: OracleCheck,
    },
    /// Depth report over the built-in corpus.
    Corpus {
        /// Run entries one after another instead of in parallel.
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Subcommand)]
enum Family {
    Simple {
        /// Print the alternation-free twin instead of the disjunctive one.
        #[arg(long)]
        plain: bool,
    },
    Alpha,
    Beta,
    AlphaN {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        allow_large: bool,
    },
    Finite {
        #[arg(long)]
        psi: String,
    },
}

#[derive(Subcommand)]
enum OracleCheck {
    /// Lasso mu-traces via trace matrices against explicit trace enumeration.
    Lasso {
        formula: String,
        #[arg(long, default_value_t = 500)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        unroll: usize,
    },
}

enum Fail {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

impl From<muforge::ParseError> for Fail {
    fn from(e: muforge::ParseError) -> Self {
        Fail::Lib(Error::Parse(e))
    }
}

type Outcome = Result<bool, Fail>;

fn read_input(arg: &str) -> Result<String, Fail> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Fail::Usage(format!("stdin: {e}")))?;
        return Ok(s);
    }
    if Path::new(arg).is_file() {
        return std::fs::read_to_string(arg).map_err(|e| Fail::Usage(format!("{arg}: {e}")));
    }
    Ok(arg.to_string())
}

fn formula(arg: &str) -> Result<Formula, Fail> {
    Ok(parse_formula(&read_input(arg)?)?)
}

fn looks_like_twb(arg: &str, text: &str) -> bool {
    arg.ends_with(".twb")
        || text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .find(|l| !l.is_empty())
            .is_some_and(|l| l.starts_with("root ") || l.starts_with("node "))
}

/// A tree file as given, or the priority-annotated tree of a formula.
fn tree_input(arg: &str) -> Result<TreeWithBackEdges, Fail> {
    let text = read_input(arg)?;
    if looks_like_twb(arg, &text) {
        return Ok(parse_twb(&text)?);
    }
    let f = parse_formula(&text)?;
    let diags = muforge::formula::validate(&f);
    if !diags.is_empty() {
        return Err(Fail::Lib(Error::IllFormed(diags)));
    }
    Ok(assign_node_priorities(&extract_core(&build_label_graph(&f)?))?)
}

fn emit<T: Serialize>(json: bool, value: &T, text: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string(value).expect("serializable"));
    } else {
        print!("{}", text());
    }
}

#[derive(Serialize)]
struct CycleLine<'a> {
    index: usize,
    parity: &'static str,
    nodes: &'a [usize],
}

fn witness_lines(w: &Witness) -> Vec<CycleLine<'_>> {
    w.cycles
        .iter()
        .enumerate()
        .map(|(i, c)| CycleLine { index: i + 1, parity: if i % 2 == 0 { "odd" } else { "even" }, nodes: c })
        .collect()
}

fn run(cli: Cli) -> Outcome {
    let json = cli.json;
    match cli.cmd {
        Cmd::Parse { formula: arg } => {
            let f = formula(&arg)?;
            let diags = muforge::formula::validate(&f);
            let diag_text: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
            emit(json, &json!({ "formula": f.to_string(), "size": f.size(), "disjunctive": is_disjunctive(&f), "diagnostics": diag_text }), || {
                let mut out = format!("{f}\n");
                for d in &diag_text {
                    out.push_str(&format!("warning: {d}\n"));
                }
                out
            });
            Ok(true)
        }
        Cmd::Depth { formula: arg } => {
            let f = formula(&arg)?;
            let a = minimal_priority_assignment(&f)?;
            emit(json, &a, || {
                let mut out = format!("co-domain 0..={}\n", a.codomain_max);
                for (x, p) in &a.entries {
                    out.push_str(&format!("{x} {p}\n"));
                }
                out
            });
            Ok(true)
        }
        Cmd::Graph { formula: arg, dot } => {
            let g = build_label_graph(&formula(&arg)?)?;
            if dot {
                print!("{}", g.to_dot());
                return Ok(true);
            }
            let nodes: Vec<_> = (0..g.len())
                .map(|i| {
                    let kids: Vec<usize> = g.nodes[i].children.iter().map(|e| e.target).collect();
                    json!({ "id": i, "kind": g.nodes[i].kind, "label": g.label_text(i), "children": kids })
                })
                .collect();
            if json {
                for n in &nodes {
                    println!("{n}");
                }
            } else {
                for n in &nodes {
                    println!("{} {} {} -> {}", n["id"], n["kind"].as_str().unwrap_or(""), n["label"].as_str().unwrap_or(""), n["children"]);
                }
            }
            Ok(true)
        }
        Cmd::Core { formula: arg, dot } => {
            let c = extract_core(&build_label_graph(&formula(&arg)?)?);
            if dot {
                print!("{}", c.to_dot());
                return Ok(true);
            }
            for (i, n) in c.nodes.iter().enumerate() {
                let kids: Vec<usize> = n.edges.iter().map(|e| e.target).collect();
                let lits: Vec<String> = n.literals.iter().map(|l| l.to_string()).collect();
                emit(json, &json!({ "id": i, "kind": n.kind, "name": n.name, "literals": lits, "children": kids }), || {
                    format!("{i} {:?} {} [{}] -> {kids:?}\n", n.kind, n.name, lits.join(" "))
                });
            }
            Ok(true)
        }
        Cmd::Equiv { left, right, bound } => {
            let c1 = extract_core(&build_label_graph(&formula(&left)?)?);
            let c2 = extract_core(&build_label_graph(&formula(&right)?)?);
            let v = core_equivalent(&c1, &c2, bound);
            emit(json, &v, || match &v {
                Verdict::Equivalent { bound, exhaustive } => {
                    format!("equivalent (bound {bound}{})\n", if *exhaustive { ", exhaustive" } else { "" })
                }
                Verdict::Inequivalent(c) => format!("not equivalent: {}\n", serde_json::to_string(c).expect("serializable")),
            });
            Ok(v.is_equivalent())
        }
        Cmd::Tree { formula: arg, dot } => {
            let f = formula(&arg)?;
            let t = assign_node_priorities(&extract_core(&build_label_graph(&f)?))?;
            print_tree(json, dot, &t);
            Ok(true)
        }
        Cmd::Minimize { input, dot } => {
            let t = minimize(&tree_input(&input)?)?;
            print_tree(json, dot, &t);
            Ok(true)
        }
        Cmd::Witness { input } => {
            let t = tree_input(&input)?;
            let w = find_max_witness(&t);
            if json {
                for line in witness_lines(&w) {
                    println!("{}", serde_json::to_string(&line).expect("serializable"));
                }
            } else {
                println!("q = {}", w.q);
                for line in witness_lines(&w) {
                    let nodes: Vec<String> = line.nodes.iter().map(|n| n.to_string()).collect();
                    println!("c{} {}: {}", line.index, line.parity, nodes.join(" "));
                }
            }
            Ok(true)
        }
        Cmd::Djf { formula: arg } => {
            let f = formula(&arg)?;
            let d = djf(&f)?;
            let a = minimal_priority_assignment(&d)?;
            emit(json, &json!({ "formula": d.to_string(), "codomain_max": a.codomain_max }), || format!("{d}\n"));
            Ok(true)
        }
        Cmd::Sat { formula: arg } => {
            let sat = tree_sat(&minimized_tree(&formula(&arg)?)?);
            emit(json, &json!({ "satisfiable": sat }), || format!("{}\n", if sat { "satisfiable" } else { "unsatisfiable" }));
            Ok(sat)
        }
        Cmd::Mc { structure, formula: arg } => {
            let m = parse_structure(&read_input(&structure)?)?;
            let holds = models(&m, &formula(&arg)?)?;
            emit(json, &json!({ "holds": holds }), || format!("{holds}\n"));
            Ok(holds)
        }
        Cmd::Gen { family } => {
            let f = match family {
                Family::Simple { plain } => {
                    let (d, p) = gen_simple_pair();
                    if plain {
                        p
                    } else {
                        d
                    }
                }
                Family::Alpha => gen_alpha(),
                Family::Beta => gen_beta(),
                Family::AlphaN { n, allow_large } => {
                    if n > ALPHA_N_CAP && !allow_large {
                        return Err(Fail::Usage(format!("n = {n} exceeds {ALPHA_N_CAP}; pass --allow-large")));
                    }
                    gen_alpha_n(n).map_err(|e| Fail::Usage(e.to_string()))?
                }
                Family::Finite { psi } => gen_finite(&formula(&psi)?)?,
            };
            emit(json, &json!({ "formula": f.to_string() }), || format!("{f}\n"));
            Ok(true)
        }
        Cmd::Oracle { check: OracleCheck::Lasso { formula: arg, count, seed, unroll } } => {
            let g = build_label_graph(&formula(&arg)?)?;
            let a = lasso_agreement(std::slice::from_ref(&g), count, seed, unroll, Exec::default());
            emit(json, &a, || {
                let mut out = format!(
                    "{} lassos checked ({} with a mu-trace, {} skipped), {} disagreements\n",
                    a.checked,
                    a.positive,
                    a.skipped,
                    a.disagreements.len()
                );
                for d in &a.disagreements {
                    out.push_str(&format!("  {d}\n"));
                }
                out
            });
            Ok(a.ok())
        }
        Cmd::Corpus { sequential } => {
            let exec = if sequential { Exec::Sequential } else { Exec::Parallel };
            let mut all_ok = true;
            for (name, row) in corpus_report(exec) {
                match row {
                    Ok(r) => emit(json, &r, || {
                        format!(
                            "{:<20} syntactic 0..={}  tableau {:?}  q {}  {} label nodes  {} ms\n",
                            r.name, r.syntactic_codomain_max, r.tableau_codomain, r.witness_q, r.label_nodes, r.millis
                        )
                    }),
                    Err(e) => {
                        all_ok = false;
                        emit(json, &json!({ "name": name, "error": e.to_string() }), || format!("{name:<20} error: {e}\n"));
                    }
                }
            }
            Ok(all_ok)
        }
    }
}

fn print_tree(json: bool, dot: bool, t: &TreeWithBackEdges) {
    if dot {
        print!("{}", t.to_dot());
    } else {
        emit(json, t, || print_twb(t));
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::IllFormed(_) => 3,
        Error::Budget(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    // Deep formulas recurse deeply; give the pipeline room.
    let worker = std::thread::Builder::new().stack_size(256 << 20).spawn(move || run(cli));
    let outcome = worker.expect("spawn worker").join().unwrap_or_else(|_| Err(Fail::Usage("internal error".into())));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(fail) => {
            let (code, msg) = match fail {
                Fail::Usage(m) => (2, m),
                Fail::Lib(e) => (exit_code(&e), e.to_string()),
            };
            if json {
                println!("{}", json!({ "error": msg, "exit": code }));
            } else {
                eprintln!("error: {msg}");
            }
            ExitCode::from(code)
        }
    }
}
