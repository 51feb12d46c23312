use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} out of range: {details}")]
    OutOfRange { what: &'static str, details: String },

    #[error("direction vector must be nonzero")]
    ZeroVector,

    #[error("direction is not unit length within 2^-40: {0}")]
    NotUnit(String),

    #[error("rational mask inconsistent with coordinates: {0}")]
    MaskMismatch(String),

    #[error("operation requires a rational direction")]
    RationalDirectionRequired,

    #[error("{what} exceeds budget: projected {projected}, budget {budget}")]
    BudgetExceeded {
        what: &'static str,
        projected: u64,
        budget: u64,
    },

    #[error("input precision cannot certify a comparison at the boundary")]
    Precision,

    #[error("certified bound verification failed: {0}")]
    Certification(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
