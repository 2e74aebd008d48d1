use thiserror::Error;

/// Errors raised by the analysis pipeline.
///
/// Everything except [`FdiError::Numerical`] describes input the caller
/// should fix; `Numerical` means a computation on valid input did not meet
/// its tolerance.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FdiError {
    #[error("dimension mismatch in {context}: {detail}")]
    DimensionMismatch { context: String, detail: String },

    #[error("fault column {index} out of range (system has {count} fault columns)")]
    FaultOutOfRange { index: usize, count: usize },

    /// Zero-based fault columns for which no index exists.
    #[error("no index exists for fault column(s) {0:?}")]
    MissingIndex(Vec<usize>),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl FdiError {
    pub(crate) fn dims(context: impl Into<String>, detail: impl Into<String>) -> Self {
        FdiError::DimensionMismatch {
            context: context.into(),
            detail: detail.into(),
        }
    }

    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, FdiError::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, FdiError>;
