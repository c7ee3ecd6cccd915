use thiserror::Error;

pub type Result<T> = std::result::Result<T, QpolyError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpolyError {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("invalid label set: {0}")]
    InvalidLabelSet(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("invalid isometry: {0}")]
    InvalidIsometry(String),

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),
}
