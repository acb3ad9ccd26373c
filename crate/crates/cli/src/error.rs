use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Parse { path: String, source: toml::de::Error },
    #[error("invalid config: {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("{context}: {source}")]
    Pricing { context: &'static str, source: spitzer_core::Error },
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Invalid { field: field.into(), reason: reason.into() }
    }

    /// 3 for numerical failures of the pricer, 2 for everything the user can
    /// fix in the input, 1 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Pricing { source, .. } if source.is_numerical() => 3,
            CliError::Pricing { .. } | CliError::Parse { .. } | CliError::Invalid { .. } | CliError::UnknownPreset(_) => 2,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Tags a core error with the module that raised it.
pub(crate) trait Context<T> {
    fn ctx(self, context: &'static str) -> Result<T>;
}

impl<T> Context<T> for spitzer_core::Result<T> {
    fn ctx(self, context: &'static str) -> Result<T> {
        self.map_err(|source| CliError::Pricing { context, source })
    }
}
