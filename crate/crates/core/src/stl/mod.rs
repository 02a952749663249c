//! Signal temporal logic: formula syntax, parsing, and robustness monitoring.

mod ast;
mod monitor;
mod parser;

pub use ast::{horizon_of, AffineExpr, Atom, Comparator, Formula, Interval};
pub use monitor::{
    additive_and, additive_and_all, additive_or, additive_or_all, evaluate, robustness,
    robustness_additive, robustness_classic, Semantics,
};
pub use parser::parse;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StlError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("malformed interval [{start}, {end}] at line {line}, column {column}: need 0 <= a <= b")]
    Interval {
        line: usize,
        column: usize,
        start: f64,
        end: f64,
    },
    #[error("trace ends at {available} but the formula needs samples up to {needed}")]
    TraceTooShort { needed: f64, available: f64 },
    #[error("signal `{0}` is not present in the trace")]
    UnknownSignal(String),
    #[error("trace contains non-finite values")]
    NonFinite,
}

impl StlError {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        StlError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}
