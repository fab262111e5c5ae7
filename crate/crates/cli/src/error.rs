use std::io;
use std::path::PathBuf;

use hesm_core::{ConfigError, ConfigErrorKind};

/// Process exit codes. Every failure class maps to its own code so scripts
/// can tell a bad config from a diverged run.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 2;
    pub const DIVERGED: u8 = 3;
    pub const COMPARE_GUARD: u8 = 4;
    pub const IO: u8 = 5;
    pub const MALFORMED: u8 = 6;
    pub const INVARIANT: u8 = 7;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read `{}`: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot write `{}`: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },

    #[error("`{}` is not valid JSON: {message}", path.display())]
    Malformed { path: PathBuf, message: String },

    #[error("{0}")]
    Config(#[from] ConfigError),

    /// Valid config, but the command cannot act on it.
    #[error("{0}")]
    Refused(String),

    #[error("simulation fault: {0}")]
    Fault(String),

    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Write { .. } => exit::IO,
            CliError::Malformed { .. } => exit::MALFORMED,
            CliError::Config(e) if e.kind == ConfigErrorKind::Invariant => exit::INVARIANT,
            CliError::Config(_) | CliError::Refused(_) => exit::CONFIG,
            CliError::Fault(_) => exit::DIVERGED,
            CliError::Mismatch(_) => exit::COMPARE_GUARD,
        }
    }

    pub(crate) fn write(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Write { path: path.into(), source }
    }
}
