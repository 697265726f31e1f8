use thiserror::Error;

/// Errors produced by the depth solvers, models and file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid density model: {0}")]
    InvalidModel(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("boundary set is empty")]
    EmptyBoundary,

    #[error("no finite upwind neighbor")]
    NoFiniteNeighbor,

    #[error("NaN encountered in {0}")]
    NaN(&'static str),

    #[error("point lies outside the grid hull")]
    OutsideGrid,

    #[error("level {level} outside attainable range (0, {max}]")]
    LevelOutOfRange { level: f64, max: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
