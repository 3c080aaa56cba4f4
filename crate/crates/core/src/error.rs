use thiserror::Error;

/// Errors raised by evaluation, fitting and data ingestion.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: must be finite and > 0")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge within {iterations} iterations")]
    Convergence { what: &'static str, iterations: usize },

    #[error("quadrature did not reach tolerance (estimate {estimate:e}, error bound {error:e})")]
    Quadrature { estimate: f64, error: f64 },

    #[error("integrand overflowed at x = {at:e}")]
    Overflow { at: f64 },

    #[error("no positive root: {0}")]
    NoRoot(String),

    #[error("maximum lies on the parameter boundary: {0}")]
    Boundary(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("non-positive or non-finite values in rows {rows:?}")]
    NonPositive { rows: Vec<usize> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of an iterative numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. }
                | Error::Quadrature { .. }
                | Error::Overflow { .. }
                | Error::NoRoot(_)
                | Error::Boundary(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
