use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: {left:?} vs {right:?}")]
    Shape {
        context: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// SVD or factorization failure, with a short report on the offending matrix.
    #[error("{operation} failed on {rows}x{cols} matrix (frobenius={frobenius:.6e}, max_abs={max_abs:.6e}, finite={finite})")]
    Numerical {
        operation: &'static str,
        rows: usize,
        cols: usize,
        frobenius: f64,
        max_abs: f64,
        finite: bool,
    },

    #[error("pair ({i}, {j}) is both must-link and cannot-link")]
    ConflictingConstraint { i: usize, j: usize },

    #[error("invalid constraint pair ({i}, {j}) for n={n}")]
    InvalidPair { i: usize, j: usize, n: usize },

    #[error("non-finite iterate in {subproblem}-subproblem at iteration {iteration}")]
    Divergence {
        subproblem: &'static str,
        iteration: usize,
    },

    #[error("{path}: {kind}")]
    Parse { path: PathBuf, kind: ParseError },

    #[error("affinity file: {0}")]
    AffinityFormat(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("file is empty")]
    Empty,
    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, field {field}: not a number: {cell:?}")]
    NonNumeric {
        line: u64,
        field: usize,
        cell: String,
    },
    #[error("line {line}, field {field}: non-finite value")]
    NonFinite { line: u64, field: usize },
    #[error("line {line}: not an integer: {text:?}")]
    NotInteger { line: u64, text: String },
    #[error("line {line}: malformed constraint {text:?}")]
    BadConstraint { line: u64, text: String },
}

impl Error {
    pub(crate) fn numerical(operation: &'static str, m: &nalgebra::DMatrix<f64>) -> Self {
        Error::Numerical {
            operation,
            rows: m.nrows(),
            cols: m.ncols(),
            frobenius: m.norm(),
            max_abs: m.amax(),
            finite: m.iter().all(|v| v.is_finite()),
        }
    }
}
