use std::path::Path;

use serde_json::json;
use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sqzsim::Error),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("bad input data: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
        }
    }

    /// Configuration and usage problems exit with 2, everything else with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Core(sqzsim::Error::Config(_) | sqzsim::Error::InvalidParameter { .. }) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}
