use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numerical accuracy: {0}")]
    NumericalAccuracy(String),

    #[error("bandwidth undefined for the zero signal")]
    ZeroSignal,

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("graph is disconnected: unlabeled block of the Laplacian is singular")]
    Disconnected,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used by the CLI's JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NumericalAccuracy(_) => "numerical_accuracy",
            Error::ZeroSignal => "zero_signal",
            Error::Resource(_) => "resource",
            Error::Infeasible(_) => "infeasible",
            Error::Disconnected => "disconnected",
            Error::Domain(_) => "domain",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
