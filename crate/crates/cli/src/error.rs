use std::path::PathBuf;

use thiserror::Error;

/// Exit code for a run whose assertions all held.
pub const EXIT_OK: u8 = 0;
/// Exit code when a computed identity or bound fails.
pub const EXIT_ASSERTION: u8 = 1;
/// Exit code for unreadable or invalid input.
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] twotime::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !e.is_input_error() => EXIT_ASSERTION,
            _ => EXIT_INPUT,
        }
    }
}
