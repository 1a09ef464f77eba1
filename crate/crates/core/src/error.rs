use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}: only d = 2 or d = 3 is supported")]
    UnsupportedDimension(usize),

    #[error("invalid mode count {0}: n must be even and at least 8")]
    InvalidModeCount(usize),

    #[error("size mismatch: expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("fields live on different grids ({left} vs {right})")]
    GridMismatch { left: String, right: String },

    #[error("coefficients are not Hermitian-symmetric (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("operation `{op}` needs a {expected} field")]
    RankMismatch { op: &'static str, expected: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported Besov exponent: {0}")]
    UnsupportedExponent(String),

    #[error("divergence constraint violated: relative divergence {0:.3e}")]
    ConstraintViolation(f64),

    #[error("non-finite value encountered at t = {time}: {context}")]
    NonFinite { time: f64, context: String },

    #[error("blow-up detected at t = {time}: energy grew to {ratio:.3e} times its initial value")]
    BlowUp { time: f64, ratio: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("{0}")]
    MissingData(String),

    #[error("malformed snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
