//! Error type shared across the toolkit.
//!
//! Errors fall into three groups with distinct process exit codes:
//! usage/input problems (exit 2), parse failures in input files (exit 2),
//! and internal invariant violations that indicate a bug (exit 3).

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid arguments, unusable input data, or an impossible request.
    #[error("{0}")]
    Usage(String),

    /// A structured input file could not be parsed. `row` is 1-based and
    /// counts physical lines of the file (so header rows are included).
    #[error("parse error at {path}:{row}: {msg}")]
    Parse {
        path: String,
        row: usize,
        msg: String,
    },

    /// An internal invariant was violated. This is a bug in the toolkit,
    /// not a problem with the input.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Parse { .. } | Error::Io { .. } => 2,
            Error::Internal(_) => 3,
        }
    }
}
