//! SPARQL subset: parser, evaluator and result serialization.
//!
//! The subset covers PREFIX, SELECT [DISTINCT] with '*' or a variable list,
//! basic graph patterns with ';' and ',' abbreviations, FILTER with
//! comparisons / boolean connectives / YEAR / MONTH / DAY / STR, OPTIONAL,
//! ORDER BY [ASC|DESC], LIMIT and OFFSET.

pub mod ast;
mod eval;
mod parser;
pub mod results;

use thiserror::Error;

pub use ast::Query;
pub use eval::{
    eval_filter, evaluate, evaluate_with_limits, Binding, EvalError, Limits, SolutionSequence,
};
pub use parser::parse_query;
pub use results::{parse_results_json, results_to_csv, serialize_results_json, ResultsError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SparqlError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown prefix '{prefix}:' at line {line}")]
    UnknownPrefix { line: usize, prefix: String },
    #[error("unknown function '{name}' at line {line}")]
    UnknownFunction { line: usize, name: String },
}
