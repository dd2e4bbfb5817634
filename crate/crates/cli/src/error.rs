use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("missing cache: {0} has not been built (run its subcommand first or pass --build)")]
    MissingCache(String),
    #[error("cache mismatch in {artifact}: {reason}")]
    CacheMismatch { artifact: String, reason: String },
    #[error("cannot parse {artifact}: {reason}")]
    Parse { artifact: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid report: {0}")]
    Report(String),
    #[error(transparent)]
    Core(#[from] cuboid_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Process exit statuses.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_CLAIM_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
