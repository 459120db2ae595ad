use thiserror::Error;

/// Errors raised across the toolkit.
///
/// The variants map onto the command-line exit codes: input problems exit
/// with 2, failures of a construction step exit with 3 and numerical
/// precision failures exit with 4.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("pipeline step failed ({step}): {detail}")]
    Pipeline { step: String, detail: String },

    #[error("precision failure: {0}")]
    Precision(String),

    #[error("pole of the L-function at s = {0}")]
    Pole(String),

    #[error("log branch ambiguous: {0}")]
    BranchAmbiguity(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn range(msg: impl Into<String>) -> Self {
        Error::OutOfRange(msg.into())
    }

    pub fn pipeline(step: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Pipeline {
            step: step.into(),
            detail: detail.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::OutOfRange(_) | Error::Pole(_) => 2,
            Error::Pipeline { .. } => 3,
            Error::Precision(_) | Error::BranchAmbiguity(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
