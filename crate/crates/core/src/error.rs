use thiserror::Error;

/// Errors produced by the clustering library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{what} guard exceeded: size {requested} > limit {limit}")]
    Capacity { what: &'static str, requested: usize, limit: usize },

    #[error("basis has {available} columns but {requested} eigenpairs were requested; lower q or K")]
    RankDeficient { available: usize, requested: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
