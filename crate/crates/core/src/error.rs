use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `r/2 + U` fell inside the guard band around zero.
    #[error(
        "continuity equation degenerates at r = {r}: |r/2 + U| = {gap:e} is within the guard band"
    )]
    Singularity { r: f64, gap: f64 },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("radius {r} lies outside the trajectory span [{lo}, {hi}]")]
    OutOfRange { r: f64, lo: f64, hi: f64 },

    #[error("adaptive quadrature on [{a}, {b}] did not converge (error estimate {estimate:e})")]
    QuadratureFailure { a: f64, b: f64, estimate: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
