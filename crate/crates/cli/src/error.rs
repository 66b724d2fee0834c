use frs_core::FrsError;
use thiserror::Error;

/// Failure of a CLI run, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("solver did not converge: {0}")]
    NotConverged(String),

    #[error("{failed} invariant group(s) failed")]
    CheckFailed { failed: usize },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::CheckFailed { .. } => 1,
            CliError::Internal(_) | CliError::Io { .. } => 4,
        }
    }
}

impl From<FrsError> for CliError {
    fn from(e: FrsError) -> Self {
        let root = match &e {
            FrsError::Sweep { source, .. } => source.as_ref(),
            other => other,
        };
        match root {
            FrsError::NotConverged { .. } => CliError::NotConverged(e.to_string()),
            FrsError::EigenNotConverged { .. } | FrsError::Integration { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(format!("serialization failed: {e}"))
    }
}
