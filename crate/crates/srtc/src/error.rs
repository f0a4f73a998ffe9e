//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by tensor algebra, solvers, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mode index {0} (expected 1, 2 or 3)")]
    InvalidMode(usize),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("rank {rank} exceeds dimension {dim} for mode {mode}")]
    RankExceedsDim { mode: usize, rank: usize, dim: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("observation mask has no observed entries")]
    EmptyMask,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
