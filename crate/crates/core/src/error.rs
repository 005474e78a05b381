use thiserror::Error;

use crate::scan::RootResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid correlation model: {0}")]
    InvalidModel(String),

    #[error("series has zero variance")]
    DegenerateSeries,

    #[error("series of length {len} is too short (need at least {min})")]
    SeriesTooShort { len: usize, min: usize },

    #[error("max lag {max_lag} out of range for a series of length {len}")]
    LagOutOfRange { max_lag: usize, len: usize },

    #[error("correlation matrix is not positive definite (pivot {pivot:e} at row {row})")]
    CorrelationNotPd { row: usize, pivot: f64 },

    #[error("kriging system is singular")]
    SingularSystem,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("weights sum to {0}, expected 1")]
    WeightsNotNormalized(f64),

    #[error("invalid index range: {0}")]
    InvalidRange(String),

    #[error("scan is empty")]
    EmptyScan,

    #[error(
        "no root in range: best |residual| = {:e} at j = {}",
        .best.point.residual.abs(),
        .best.j_star
    )]
    NoRootInRange { best: Box<RootResult> },

    #[error("malformed CSV at line {line}: {message}")]
    MalformedCsv { line: usize, message: String },

    #[error("input contains no observations")]
    EmptyInput,

    #[error("invalid AR(1) specification: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
