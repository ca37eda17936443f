use thiserror::Error;

/// Errors raised by validation, estimation and I/O.
#[derive(Debug, Error)]
pub enum FcpError {
    #[error("empty input")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("negative value in row {row}, column {column}")]
    NegativeValue { row: usize, column: usize },
    #[error("non-finite value in row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("series needs at least {min} observations, got {got}")]
    TooFewObservations { min: usize, got: usize },
    #[error("index range [{t1}, {t2}] outside 1..={n}")]
    IndexOutOfRange { t1: usize, t2: usize, n: usize },
    #[error("segment [{start}, {end}] shorter than {min} observations")]
    SegmentTooShort {
        start: usize,
        end: usize,
        min: usize,
    },
    #[error("no active inputs where both segment frontiers are positive")]
    NoActiveEvaluationPoints,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FcpError {
    /// True for errors caused by the caller's data or parameters rather than
    /// by the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, FcpError::Io(_))
    }
}

pub type Result<T, E = FcpError> = std::result::Result<T, E>;
