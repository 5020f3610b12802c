use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("check failed: {0}")]
    Assertion(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Assertion(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Library errors caused by bad input map to config errors; everything
/// else is a failed numerical check.
impl From<hierlab::Error> for CliError {
    fn from(e: hierlab::Error) -> Self {
        use hierlab::Error as E;
        match e {
            E::InvalidGrid(_)
            | E::GridMismatch { .. }
            | E::OutOfRange { .. }
            | E::InvalidArgument(_)
            | E::SchemeMismatch { .. }
            | E::StrideTooCoarse { .. }
            | E::TooLarge(_)
            | E::State(_) => CliError::Config(e.to_string()),
            _ => CliError::Assertion(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
