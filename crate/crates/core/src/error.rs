use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate Pauli-Villars masses: {0}")]
    DegenerateMasses(String),

    #[error("integrand returned a non-finite value {value} at x = {at}")]
    NonFiniteEvaluation { at: f64, value: f64 },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("series not converged after {terms} terms (last term {last_term:e})")]
    SeriesTruncation { terms: usize, last_term: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("grid spacing is not uniform: {0}")]
    NonUniformGrid(String),

    #[error("incomplete grid: expected {expected} cells, found {found}")]
    IncompleteGrid { expected: usize, found: usize },

    #[error("grid too small: every axis needs at least 3 cells, got {0:?}")]
    GridTooSmall([usize; 3]),

    #[error("cannot resample grid: {0}")]
    Resample(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
