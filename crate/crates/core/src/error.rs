//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by index-set construction, spectra, sampling, recovery and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the admissible range of a class or routine.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A flat basis index is outside `1..=size`.
    #[error("basis index {index} out of range for a system of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    /// A point does not belong to the measure space.
    #[error("point outside the domain: {0}")]
    OutsideDomain(String),

    /// A configured size cap would be exceeded.
    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    ResourceCap {
        what: String,
        needed: u128,
        cap: u128,
    },

    /// A spectrum has no analytic tail rule, so its remainder cannot be certified.
    #[error("missing tail rule: {0}")]
    MissingTailRule(String),

    /// The weighted design matrix is numerically rank deficient.
    #[error("rank deficient design: smallest singular value {s_min:e}, largest {s_max:e}")]
    RankDeficient { s_min: f64, s_max: f64 },

    /// Array or vector sizes do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A series required by a bound does not converge.
    #[error("divergent series: {0}")]
    Divergent(String),

    /// Rejection sampling could not produce the requested points.
    #[error("sampling failure: {0}")]
    Sampling(String),

    /// A numerical consistency assertion failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A certificate is too loose for the requested guarantee.
    #[error("certificate failure: {0}")]
    Certificate(String),

    /// The experiment configuration is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// The requested operation is not available for this input.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line tool for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => 2,
            Error::Certificate(_) | Error::Numerical(_) | Error::RankDeficient { .. } => 3,
            Error::ResourceCap { .. } => 4,
            _ => 1,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
