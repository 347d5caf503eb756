use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("bad config: {0}")]
    Config(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] ptg_core::Error),

    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    CheckFailure = 1,
    Numerical = 2,
    BadConfig = 3,
}

impl CliError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            CliError::Config(_) | CliError::Io { .. } => ExitStatus::BadConfig,
            CliError::Core(e) if e.is_numerical() => ExitStatus::Numerical,
            CliError::Core(_) => ExitStatus::BadConfig,
            CliError::ChecksFailed { .. } => ExitStatus::CheckFailure,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
