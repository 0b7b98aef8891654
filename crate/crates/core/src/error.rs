use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: usize },

    #[error("family {family}: tail mass fraction {tail:.3e} exceeds tolerance {tolerance:.1e}")]
    TailMass {
        family: String,
        tail: f64,
        tolerance: f64,
    },

    #[error("shift {shift} is not an integer multiple of the grid spacing {spacing}")]
    NonMultipleShift { shift: f64, spacing: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown registry entry `{0}`")]
    UnknownEntry(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
