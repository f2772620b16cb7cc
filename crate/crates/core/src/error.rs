//! Crate-wide error type and exit-code mapping for the CLI.

use thiserror::Error;

/// Errors produced by model construction, propagation, and the sweep engine.
#[derive(Debug, Error)]
pub enum NvError {
    /// Invalid input: out-of-range parameter, malformed config, bad CLI flag.
    #[error("validation error: {0}")]
    Validation(String),

    /// Numerical failure: non-finite matrix entries, degenerate linear algebra.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The generator's numerical null space has multiplicity above one, so
    /// no unique stationary distribution exists.
    #[error("non-unique steady state: null-space multiplicity {0}")]
    NonUniqueSteadyState(usize),

    /// Underlying I/O failure while reading config or writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl NvError {
    pub fn validation(msg: impl Into<String>) -> Self {
        NvError::Validation(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        NvError::Numeric(msg.into())
    }

    /// Process exit status used by the CLI: 2 for validation errors,
    /// 1 for numeric/runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            NvError::Validation(_) => 2,
            NvError::Numeric(_) | NvError::NonUniqueSteadyState(_) | NvError::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, NvError>;
