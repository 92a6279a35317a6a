use thiserror::Error;

/// Errors raised by the numerical routines and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("point is not on the parent set: {0}")]
    NotOnSet(String),

    #[error("no closed form available: {0}")]
    NoClosedForm(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("singular kernel evaluation: {0}")]
    Singular(String),

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
