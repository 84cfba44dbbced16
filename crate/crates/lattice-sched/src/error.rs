use std::io;
use std::path::PathBuf;

use crate::gatefile::GateParseError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Gates { path: PathBuf, source: GateParseError },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] lattice_sched_core::Error),
    #[error("schedule failed verification: {0}")]
    Verification(String),
    #[error("{failed} of {total} sweep runs failed")]
    PartialSweep { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn json(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Json { path, source }
    }

    pub fn csv(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Csv { path, source }
    }

    /// Process exit status: 2 for bad input, 3 for scheduling failures,
    /// 4 when a sweep finished with some runs failed.
    pub fn exit_code(&self) -> i32 {
        use lattice_sched_core::Error as E;
        match self {
            CliError::Core(E::Unroutable { .. } | E::Starvation { .. }) | CliError::Verification(_) => 3,
            CliError::PartialSweep { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
