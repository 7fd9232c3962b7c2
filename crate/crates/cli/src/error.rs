use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The config did not parse or failed validation. `path` is the
    /// location inside the JSON document, `.` for the root.
    #[error("invalid config at {path}: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Core(#[from] tracelab_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl ToString) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration and validation, 3 for numeric convergence, 4 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(tracelab_core::Error::Convergence { .. }) => 3,
            CliError::Core(_) => 2,
            CliError::Io { .. } => 4,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub(crate) trait AtPath<T> {
    /// Reports a validation failure of the library against a config field.
    fn at(self, path: &str) -> Result<T>;
}

impl<T> AtPath<T> for tracelab_core::Result<T> {
    fn at(self, path: &str) -> Result<T> {
        self.map_err(|e| match e {
            tracelab_core::Error::Convergence { .. } => CliError::Core(e),
            other => CliError::config(path, other),
        })
    }
}
