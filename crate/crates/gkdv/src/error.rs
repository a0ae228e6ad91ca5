use std::path::PathBuf;

/// Exit code for a run where every check passed.
pub const EXIT_OK: i32 = 0;
/// Exit code when a check or a numerical operation failed.
pub const EXIT_CHECK: i32 = 1;
/// Exit code for configuration, cache or IO problems.
pub const EXIT_SETUP: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: magic mismatch, expected {expected:?}")]
    BadMagic { path: PathBuf, expected: &'static str },
    #[error("{path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    /// Failure while preparing inputs (profiles, grids), reported as a setup problem.
    #[error("{0}")]
    Setup(gkdv_core::Error),
    /// Failure of the requested numerical operation itself.
    #[error("{0}")]
    Numerics(gkdv_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerics(_) => EXIT_CHECK,
            _ => EXIT_SETUP,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
