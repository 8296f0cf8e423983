use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },

    #[error("cell is empty")]
    EmptyCell,

    #[error("set is unbounded")]
    Unbounded,

    #[error("cell is not canonical")]
    NotCanonical,

    #[error("label {label} is not below the cell index {index}")]
    LabelOutOfRange { label: String, index: String },

    #[error("decomposition is not certified special")]
    NotSpecial,

    #[error("decomposition does not partition the carrier: {0}")]
    NotPartitioned(String),

    #[error("point is outside the domain")]
    OutsideDomain,

    #[error("time {t} outside [0, {q}]")]
    TimeOutOfRange { t: String, q: String },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("invalid cell: {0}")]
    InvalidCell(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
