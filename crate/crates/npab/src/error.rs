//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid probability distribution: {0}")]
    InvalidProbability(String),

    #[error("state is not normalized: |amp0|^2 + |amp1|^2 = {0}")]
    NotNormalized(f64),

    #[error("not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid source parameter: {0}")]
    InvalidSourceParameter(String),

    #[error("code block length {0} exceeds the table-decoding limit of {1}")]
    CodeTooLarge(usize, usize),

    #[error("vector is not a codeword of the expected code")]
    NotInCode,

    #[error("invalid linear code: {0}")]
    InvalidCode(String),

    #[error("codes are not properly nested: {0}")]
    NotNested(String),

    #[error("malformed code-pair file: {0}")]
    CodePairFormat(String),

    #[error("attack slots do not form a complete position-by-round grid: {0}")]
    IncompleteSlotGrid(String),

    #[error("insufficient samples: {got} sessions, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("basis sequence has been discarded and may not be used")]
    DiscardedBasisSequence,

    #[error("invalid session parameters: {0}")]
    InvalidParams(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("malformed JSON: {0}")]
    Json(String),
}
