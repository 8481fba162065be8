//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("step index k = {k} out of range (expected 1 <= k <= {max})")]
    KOutOfRange { k: usize, max: usize },

    #[error("operator is numerically singular")]
    SingularOperator,

    #[error("right-hand side vector is zero")]
    ZeroVector,

    #[error("degenerate vector: Krylov columns have numerical rank {rank} < {k}")]
    DegenerateVector { rank: usize, k: usize },

    #[error("degenerate start: GMRES residual vanishes at step {k} (minimal polynomial degree <= k)")]
    DegenerateStart { k: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("certification failure: {0}")]
    CertificationFailure(String),

    #[error("top singular subspace cannot be paired: {0}")]
    PairingAmbiguity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
