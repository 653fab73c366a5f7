use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the channel model.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structured input could not be parsed.
    #[error("parse error in {origin}: {message}")]
    Parse { origin: String, message: String },

    /// A parsed value violates a physical or structural invariant.
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    /// The requested configuration is inconsistent (e.g. a placement layer
    /// that is not part of the stack).
    #[error("configuration error: {0}")]
    Config(String),

    /// The nodal matrix could not be factored.
    #[error("singular system: {0}")]
    Singular(String),

    /// A sweep point failed; wraps the underlying cause.
    #[error("sweep point {param}={value}: {source}")]
    SweepPoint {
        param: String,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by user input rather than numerical failure.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Parse { .. } | Error::Validation { .. } | Error::Config(_) => true,
            Error::SweepPoint { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
