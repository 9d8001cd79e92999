use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] persym_core::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
