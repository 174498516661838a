use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("factor product {product} does not match dimension {dim}")]
    FactorMismatch { dim: usize, product: usize },
    #[error("invalid slot {slot} for a space with {factors} tensor factors")]
    InvalidSlot { slot: usize, factors: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("local dimension must be at least {min}, got {d}")]
    DimensionTooSmall { d: usize, min: usize },
    #[error("werner parameter phi = {0} outside [-1, 1]")]
    PhiOutOfRange(f64),
    #[error("not a density operator: {0}")]
    NotDensity(String),
    #[error("not a valid observable: {0}")]
    InvalidObservable(String),
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("invalid source-operator: {0}")]
    InvalidSource(String),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
