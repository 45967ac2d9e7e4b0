use std::path::PathBuf;

/// Crate-wide error type.
///
/// The variants map onto the CLI exit codes: `Parameter` is a usage or
/// validation problem (exit 2), everything else is a runtime failure (exit 1).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A symmetric factorization hit a pivot below the singularity threshold.
    #[error(
        "matrix is numerically singular (pivot {pivot:.3e} at index {index}); \
         for lambda >= 1e6 rerun with trace deflation enabled (--deflate-trace)"
    )]
    NearSingular { index: usize, pivot: f64 },

    #[error("eigensolver failed to converge after {sweeps} QR sweeps; offending matrix dumped to {dump:?}")]
    EigNonConvergence { sweeps: usize, dump: PathBuf },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Spectrum classification contradicted a structural rank property.
    #[error("property violation: {0}")]
    PropertyViolation(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// CLI exit code for this error (2 usage/validation, 1 otherwise).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
