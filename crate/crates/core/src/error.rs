use thiserror::Error;

pub type Result<T> = std::result::Result<T, CodingError>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodingError {
    #[error("division by zero in GF({0})")]
    DivisionByZero(u64),

    #[error("modulus {0} is not a prime in [2, 2^32)")]
    NotPrime(u64),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("duplicate evaluation point {0}")]
    DuplicatePoint(u64),

    #[error("empty input")]
    EmptyInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient workers: need at least {needed}, have {got}")]
    InsufficientWorkers { needed: usize, got: usize },

    #[error("recovery threshold not met: needed {needed} results, got {got}")]
    RecoveryThresholdNotMet { needed: usize, got: usize },

    #[error("decoded output differs from the reference product: {0}")]
    CorrectnessViolation(String),

    #[error("matrix parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CodingError {
    fn from(e: std::io::Error) -> Self {
        CodingError::Io(e.to_string())
    }
}
