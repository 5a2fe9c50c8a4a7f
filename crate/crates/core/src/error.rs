use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("kernel evaluation failed: {0}")]
    Evaluation(String),

    #[error("quadrature did not converge: achieved relative error {achieved:.3e} > tolerance {tolerance:.3e}")]
    QuadratureNonConvergence { achieved: f64, tolerance: f64 },

    #[error("matrix is not positive semi-definite on {grid}: eigenvalue {eigenvalue:.3e} below -{floor:.1e} * {top:.3e}")]
    Definiteness {
        grid: String,
        eigenvalue: f64,
        floor: f64,
        top: f64,
    },

    #[error("eigenvalue index {index} is at or beyond the trusted floor index {floor_index}")]
    DegenerateEigenvalue { index: usize, floor_index: usize },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("fit window error: {0}")]
    Window(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("ill-conditioned Gram matrix at n = {n}: condition number {condition:.3e} exceeds {limit:.1e}")]
    Conditioning { n: usize, condition: f64, limit: f64 },

    #[error("internal numerical error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Module the error conventionally originates from, used by the CLI's
    /// machine-readable error report.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Parameter(_) | Error::Evaluation(_) | Error::QuadratureNonConvergence { .. } => {
                "kernels"
            }
            Error::Definiteness { .. } | Error::DegenerateEigenvalue { .. } | Error::Internal(_) => {
                "spectral"
            }
            Error::Window(_) | Error::Conditioning { .. } => "analysis",
            Error::Size(_) => "quadrature",
            Error::Usage(_) | Error::Io(_) | Error::Json(_) => "cli",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
