use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerical layers (material, tube model, barrier, filter).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Constitutive calibration could not produce a modulus.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// No control input satisfies the barrier constraint at this state.
    #[error("infeasible safety constraint: a = {a:e}, b = {b:e}")]
    Infeasible { a: f64, b: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Configuration and I/O errors surfaced by the CLI layer.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },

    #[error("failed to parse {file}: {message}")]
    Parse { file: PathBuf, message: String },

    #[error("{}: {source}", file.display())]
    Io {
        file: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", file.display())]
    Csv { file: PathBuf, message: String },
}

impl ConfigError {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}
