use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical invariant violated: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<qwalk_core::Error> for CliError {
    fn from(e: qwalk_core::Error) -> Self {
        use qwalk_core::Error as E;
        match e {
            E::NormDrift { .. } | E::Trajectory { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
