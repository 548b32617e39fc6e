use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}, column `{column}`: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{0}: table has no data rows")]
    EmptyTable(PathBuf),

    #[error("{path}: label column `{column}` not found in header")]
    MissingLabelColumn { path: PathBuf, column: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not numerically positive definite (minimum eigenvalue estimate {min_eigenvalue:e}): {context}")]
    NotPositiveDefinite { context: String, min_eigenvalue: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("model file: {0}")]
    Model(String),
}

/// Coarse error class used for exit codes and machine-readable reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Input,
    Numerical,
}

impl ErrorCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Input => "input",
            ErrorCategory::Numerical => "numerical",
        }
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::NotPositiveDefinite { .. } | Error::Numerical(_) => ErrorCategory::Numerical,
            _ => ErrorCategory::Input,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
