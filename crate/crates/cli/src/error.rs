use std::path::Path;

use thiserror::Error;

/// Failures surfaced by the CLI, split by exit code: configuration problems
/// (bad flags, unreadable scenario, invalid input data) exit with 2, while
/// failures inside a pipeline stage exit with 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("stage '{stage}' failed: {message}")]
    Stage { stage: &'static str, message: String },
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stage { .. } => 3,
        }
    }

    /// Re-tags a load-time error as a failure of `stage`. Errors that are
    /// already stage failures keep their original stage.
    pub fn into_stage(self, stage: &'static str) -> Self {
        match self {
            CliError::Config(message) => CliError::Stage { stage, message },
            other => other,
        }
    }
}

/// Wraps any error raised while executing `stage`, pinning the blame in the
/// message so aborted runs say which step died.
pub fn in_stage<T, E: std::fmt::Display>(
    stage: &'static str,
    result: Result<T, E>,
) -> Result<T, CliError> {
    result.map_err(|e| CliError::Stage {
        stage,
        message: e.to_string(),
    })
}

/// IO adapter that keeps the offending path in the message.
pub fn io_config<T>(path: &Path, result: std::io::Result<T>) -> Result<T, CliError> {
    result.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
