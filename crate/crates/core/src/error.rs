use thiserror::Error;

/// Errors produced by the numerical kernels and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series did not converge within {terms} terms (|z| = {z})")]
    NonConvergence { terms: usize, z: f64 },

    #[error("asymptotic expansion needs eta >= {threshold}, got {eta}")]
    BelowThreshold { eta: f64, threshold: f64 },

    #[error("quadrature missed tolerance {tol:e} (error estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("grid mismatch: expected {expected} samples, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("tridiagonal eigensolver did not converge after {0} iterations")]
    EigenNoConvergence(usize),

    #[error("singular system: {0}")]
    Singular(String),

    /// The convolution kernel of a deconvolution problem vanishes identically,
    /// so the data cannot determine the unknown.
    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),

    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
