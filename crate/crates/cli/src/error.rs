use std::path::PathBuf;

use thiserror::Error;

/// Stable process exit statuses.
pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Degenerate(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Degenerate(_) => EXIT_DEGENERATE,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<pingpong_core::Error> for CliError {
    fn from(e: pingpong_core::Error) -> Self {
        match e {
            pingpong_core::Error::InvalidInput(m) => CliError::Validation(m),
            pingpong_core::Error::DegenerateChannel(m) => CliError::Degenerate(m),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
