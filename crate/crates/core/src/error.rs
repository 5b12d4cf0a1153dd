use thiserror::Error;

/// Errors produced by the inference and model-selection routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("Laplace approximation invalid at this MAP: Hessian is not positive definite")]
    LaplaceInvalid,

    #[error("maximum-likelihood estimate undefined: design matrix is rank deficient (MAP still exists)")]
    MlUndefined,

    #[error("MAP undefined for parameter group {group}: no observations in the group")]
    EmptyGroup { group: usize },

    #[error("invalid hypothesis specification at `{token}`: {reason}")]
    Config { token: String, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("row {row}: {source}")]
    AtRow {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure_finite(value: f64, what: &str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!("{what} must be finite, got {value}")))
    }
}
