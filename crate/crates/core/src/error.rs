use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Conditioning failures during a sweep are not errors; they are reported
/// through [`crate::Outcome::Skipped`] so that curves can stop at the cliff.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("duplicate sites at indices {0} and {1}")]
    DuplicateSites(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),

    #[error("unknown test function `{0}`")]
    UnknownFunction(String),

    #[error("spectrum of kernel `{0}` is not available")]
    UnsupportedKernel(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient samples: {got} survive the condition gate, {needed} needed")]
    InsufficientSamples { got: usize, needed: usize },

    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
