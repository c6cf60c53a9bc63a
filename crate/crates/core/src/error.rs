use thiserror::Error;

/// Errors produced anywhere in the discovery pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("timeline is not strictly increasing at index {index}")]
    NonMonotoneTimeline { index: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid interval: end {end} must exceed start {start}")]
    InvalidInterval { start: f64, end: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integrator order {0} is not supported (expected 1, 2 or 3)")]
    OrderUnsupported(usize),

    #[error("timeline of length {len} is too short, need at least {required}")]
    TimelineTooShort { len: usize, required: usize },

    #[error("ODE integration failed at t = {time}: {reason}")]
    IntegrationFailure { time: f64, reason: String },

    #[error("window length mismatch: expected {expected}, found {found}")]
    WindowLengthMismatch { expected: usize, found: usize },

    #[error("Gram matrix is not positive definite even at the maximum jitter")]
    SingularGram,

    #[error("hyperparameter optimization failed: {0}")]
    OptimizationFailure(String),

    #[error("universal integer code requires z >= 1, got {0}")]
    NonPositiveInteger(u64),

    #[error("parameter {index} is not finite")]
    NonFiniteParameter { index: usize },

    #[error("AUPRC is undefined when the reference graph has no edges")]
    NoTrueEdges,

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
