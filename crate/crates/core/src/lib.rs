//! Modal mu-calculus analysis toolkit: tableau graphs, trees with back edges,
//! disjunctive form, priority minimization and parity-game model checking.

pub mod equiv;
pub mod error;
pub mod assign;
pub mod closure;
pub mod core_graph;
pub mod corpus;
pub mod disjunctive;
pub mod dot;
pub mod formula;
pub mod graph;
pub mod index;
pub mod game;
pub mod kripke;
pub mod oracle;
pub mod par;
pub mod parse;
pub mod random;
pub mod sweep;
pub mod tableau;
pub mod trace;
pub mod twb;
pub mod zielonka;

pub use error::{Error, Result};
pub use formula::{
    compact_priorities, is_alternation_free, literals_consistent, minimal_priority_assignment, validate, Diagnostic,
    DiagnosticKind, FixKind, Formula, Literal, PriorityAssignment,
};
pub use kripke::{parse_structure, print_structure, KripkeStructure};
pub use parse::{parse_formula, print_formula, ParseError, SourceSpan};
pub use twb::{parse_twb, print_twb, TreeWithBackEdges, TwbKind, TwbNode};
pub use dot::{export_dot, ToDot};
