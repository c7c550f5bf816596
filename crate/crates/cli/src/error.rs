use std::path::{Path, PathBuf};

use crate::config::SweepParam;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Schema or validation failure, reported with the offending field path.
    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] sparse_mcc::Error),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Core(_) => 1,
        }
    }

    pub(crate) fn with_context(self, point: &[(SweepParam, f64)]) -> Self {
        match self {
            CliError::Config { path, message } if !point.is_empty() => {
                let at = point
                    .iter()
                    .map(|(p, v)| format!("{p}={v}"))
                    .collect::<Vec<_>>()
                    .join(", ");
                CliError::Config {
                    path,
                    message: format!("{message} (at sweep point {at})"),
                }
            }
            other => other,
        }
    }
}
