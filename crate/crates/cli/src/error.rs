use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] kscale_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{failed} of {total} checks failed")]
    Verification { failed: usize, total: usize },
}

impl CliError {
    /// 1 for failed checks, 2 for bad input, 3 when the numerics cannot deliver.
    pub fn exit_code(&self) -> u8 {
        use kscale_core::Error as E;
        match self {
            CliError::Verification { .. } => 1,
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(E::InsufficientSamples { .. } | E::Domain(_) | E::Quadrature(_)) => 3,
            CliError::Core(_) => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
