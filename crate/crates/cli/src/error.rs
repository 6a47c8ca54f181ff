use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Exit code 2.
    #[error("{0}")]
    Input(String),
    /// Exit code 3.
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    /// Exit code 3.
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    /// Exit code 1: a replayed output differs from the recorded file.
    #[error("replay mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Write { .. } | CliError::Read { .. } => 3,
            CliError::Mismatch(_) => 1,
        }
    }
}

impl From<heatctl::Error> for CliError {
    fn from(e: heatctl::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
