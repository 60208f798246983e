//! The SPARQL subset: basic graph patterns, comparison filters, DISTINCT and LIMIT.

mod ast;
mod eval;
mod parser;
mod results;

use thiserror::Error;

pub use ast::{CompareOp, Filter, Query, TermPattern, TriplePattern, Variable};
pub use eval::evaluate;
pub use parser::parse_query;
pub use results::{serialize_results, SolutionSequence};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SparqlError {
    #[error("undeclared prefix {0:?}")]
    UndeclaredPrefix(String),
    #[error("syntax error at line {line}, column {column}: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        column: usize,
        expected: String,
        found: String,
    },
    #[error("malformed SPARQL JSON results: {0}")]
    Results(String),
}
