use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failures of a subcommand, split by exit code: input problems exit with 2,
/// everything else with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(#[from] obsent_core::Error),
    #[error("{}: {message}", path.display())]
    Schema { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Schema { .. } | CliError::Usage(_) => 2,
            CliError::Read { .. } | CliError::Write { .. } | CliError::Runtime(_) => 1,
        }
    }

    pub(crate) fn schema(path: &Path, message: impl ToString) -> Self {
        CliError::Schema { path: path.to_path_buf(), message: message.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
