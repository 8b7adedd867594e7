use std::path::Path;

use lblab_core::Error as CoreError;
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, manifest schema violations, invalid configurations.
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Parse(String),

    #[error("{0}")]
    Io(String),

    /// Misaligned sample ids or an undefined statistic.
    #[error("{0}")]
    Statistics(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse(_) | CliError::Io(_) => 3,
            CliError::Statistics(_) => 4,
        }
    }

    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub(crate) fn parse(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Parse(format!("{}: {err}", path.display()))
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::InvalidInput(_) => CliError::Usage(msg),
            CoreError::Parse { .. } => CliError::Parse(msg),
            CoreError::Io(_) => CliError::Io(msg),
            CoreError::Degenerate(_) | CoreError::Alignment { .. } => CliError::Statistics(msg),
        }
    }
}
