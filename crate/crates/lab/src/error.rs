use std::io;
use std::path::PathBuf;

/// Everything that can stop a lab command.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// Malformed or inconsistent configuration; `path` locates the offending key.
    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Core(#[from] mnac_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed codebook file: {0}")]
    Format(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl LabError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config { path: path.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit status: 2 for invalid input, 3 for an exceeded search
    /// budget, 1 for I/O and runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(mnac_core::Error::Infeasible { .. }) => 3,
            Self::Config { .. } | Self::Core(_) | Self::Format(_) => 2,
            Self::Io { .. } | Self::Pool(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
