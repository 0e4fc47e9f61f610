use thiserror::Error;

/// Errors raised by the numerical constructions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("alpha outside open unit disc: |alpha| = {modulus}")]
    Domain { modulus: f64 },

    #[error("multiplicity must be at least 1")]
    ZeroMultiplicity,

    #[error("index {index} out of range (max {max})")]
    Index { index: usize, max: usize },

    #[error("non-finite coefficient at index {0}")]
    NonFinite(usize),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("cap {cap} too small: {detail}")]
    CapTooSmall { cap: usize, detail: String },

    #[error("inner chain violated at position {position}: {detail}")]
    Chain { position: usize, detail: String },

    #[error("linear algebra failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
