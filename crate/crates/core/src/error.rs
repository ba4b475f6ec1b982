use thiserror::Error;

use crate::funcexpr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector must have at least one entry")]
    EmptyVector,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("grid of {m} nodes is too small for order {order} (need at least {required})")]
    GridTooSmall {
        m: usize,
        order: usize,
        required: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("orbit drift {drift:.3e} at power {power} exceeds the failure threshold")]
    OrbitDrift { power: i64, drift: f64 },

    #[error("random matrix was rank deficient after {attempts} attempts")]
    RankDeficient { attempts: usize },

    #[error(
        "spectral recovery failed after {attempts} attempts: column {column} residual {residual:.3e}"
    )]
    SpectralResidual {
        column: usize,
        residual: f64,
        attempts: usize,
    },

    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
