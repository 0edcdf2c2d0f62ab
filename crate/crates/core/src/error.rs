use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown {what} `{value}`")]
    Unknown { what: &'static str, value: String },

    #[error("query ({x:.4}, {y:.4}) lies outside the heightfield")]
    OutOfBounds { x: f64, y: f64 },

    #[error("shape mismatch for {what}: expected {expected}, found {found}")]
    Shape {
        what: String,
        expected: String,
        found: String,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("simulator used before reset")]
    NotReset,

    #[error("spawn rejected: terrain rises {rise:.3} m under the body (tolerance {tolerance:.3} m)")]
    SpawnCollision { rise: f64, tolerance: f64 },

    #[error("invalid robot state: {0}")]
    InvalidState(String),

    #[error("malformed {format} data: {reason}")]
    Format { format: &'static str, reason: String },

    #[error("protocol error ({code}): {message}")]
    Protocol { code: String, message: String },

    #[error("backend failure: {0}")]
    Backend(String),

    #[error("configuration error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn format(format: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            format,
            reason: reason.into(),
        }
    }

    pub(crate) fn protocol(code: &str, message: impl Into<String>) -> Self {
        Error::Protocol {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

pub(crate) fn ensure_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}
