use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use bia_core::solvers::Variant;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid flags: {0}")]
    Flag(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("malformed PGM at byte {offset}: {msg}")]
    Pgm { offset: usize, msg: String },

    #[error("problem setup failed: {0}")]
    Setup(bia_core::Error),

    #[error("solver {variant} failed: {source}")]
    Solver { variant: Variant, source: bia_core::Error },

    #[error("reference run ({variant}) failed: {source}")]
    Reference { variant: Variant, source: bia_core::Error },
}

impl HarnessError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }

    /// Process exit code: 2 for bad flags, 3 for solver failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Flag(_) | HarnessError::Setup(bia_core::Error::Config(_)) => 2,
            HarnessError::Solver { .. } | HarnessError::Reference { .. } => 3,
            HarnessError::Setup(_) => 3,
            HarnessError::Io { .. } | HarnessError::Pgm { .. } => 1,
        }
    }
}
