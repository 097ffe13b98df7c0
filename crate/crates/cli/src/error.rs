use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot parse {path}: {source}")]
    ConfigParse { path: PathBuf, source: serde_json::Error },

    #[error("{context}: {source}")]
    Core { context: String, source: polardeg::Error },

    #[error("oracle check failed: {0}")]
    Oracle(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("writing {path}: {source}")]
    Output { path: PathBuf, source: polardeg::Error },
}

impl CliError {
    /// 0 success, 1 I/O, 2 configuration, 3 numerical contract.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::ConfigParse { .. } => 2,
            CliError::Core { source, .. } => match source {
                polardeg::Error::Io(_) | polardeg::Error::Csv(_) => 1,
                e if e.is_input_error() => 2,
                _ => 3,
            },
            CliError::Oracle(_) => 3,
            CliError::Io { .. } | CliError::Output { .. } => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches a short description of the step that failed.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for polardeg::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Core {
            context: what(),
            source,
        })
    }
}
