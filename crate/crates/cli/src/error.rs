use helmscat_core::error::{HelmError, ProfileError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// A configuration file does not match the expected schema; `path` locates the field.
    #[error("{file}: {path}: {message}")]
    Schema {
        file: String,
        path: String,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Solver(#[from] HelmError),
}

impl CliError {
    pub fn schema(file: &str, e: ProfileError) -> Self {
        CliError::Schema {
            file: file.into(),
            path: e.path,
            message: e.message,
        }
    }
}
