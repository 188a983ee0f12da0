use thiserror::Error;

use crate::formula::Diagnostic;
use crate::parse::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("formula is not closed and guarded: {}", join(.0))]
    IllFormed(Vec<Diagnostic>),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("formula is not in disjunctive form")]
    NotDisjunctive,
    #[error("malformed tree with back edges: {0}")]
    MalformedTree(String),
    #[error("priorities are not in decreasing order: {0}")]
    Ordering(String),
    #[error("path is not in the graph: {0}")]
    PathNotInGraph(String),
    #[error("malformed priorities: {0}")]
    Priorities(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}
