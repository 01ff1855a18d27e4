use std::path::PathBuf;

use gpsup_core::{Error, ErrorKind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config field `{path}`: {reason}")]
    Field { path: String, reason: String },

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: Error,
    },
}

impl CliError {
    /// 2 validation, 3 numeric or embedding, 4 memory budget, 1 output I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Field { .. } | CliError::Read { .. } => 2,
            CliError::Write { .. } => 1,
            CliError::Core { source, .. } => match source.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Numeric => 3,
                ErrorKind::Budget => 4,
                ErrorKind::Io => 2,
            },
        }
    }
}

pub trait Context<T> {
    fn context(self, f: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, Error> {
    fn context(self, f: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { context: f(), source })
    }
}
