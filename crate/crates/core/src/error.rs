//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A record that could not be decoded at all (as opposed to a bad row,
    /// which is collected in the rejection report and does not abort a run).
    #[error("parse error in {file}, line {line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },

    #[error("schema error in {file}: {message}")]
    Schema { file: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("no directed path between the requested points")]
    Unreachable,

    #[error("degenerate trace: {0}")]
    DegenerateTrace(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("scenario spec error: {0}")]
    Scenario(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Coarse category used for process exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Io { .. } => ErrorCategory::Io,
            Error::Parse { .. } | Error::Schema { .. } => ErrorCategory::Data,
            Error::Validation(_) => ErrorCategory::Data,
            Error::Input(_) | Error::Scenario(_) => ErrorCategory::Config,
            Error::Unreachable
            | Error::DegenerateTrace(_)
            | Error::DegenerateSample(_)
            | Error::Contract(_) => ErrorCategory::Analysis,
            Error::Stage { source, .. } => source.category(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Io,
    Data,
    Analysis,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Io => 3,
            ErrorCategory::Data => 4,
            ErrorCategory::Analysis => 5,
        }
    }
}
