use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("block too short: n = {0} (need n >= 3)")]
    BlockTooShort(usize),

    #[error("block too long: n = {n} exceeds the supported maximum {max}")]
    BlockTooLong { n: usize, max: usize },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {diff:e}")]
    NonSymmetric { row: usize, col: usize, diff: f64 },

    #[error("eigenvalue bracketing failed: {0}")]
    Bracketing(String),

    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})"
    )]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error(
        "unvalidated photon number nu = {0} (only 0..=3 are validated; enable best-effort mode)"
    )]
    UnvalidatedPhotonNumber(usize),

    #[error("convexity violated at lambda = {lambda}: excess {excess:e}")]
    NonConvex { lambda: f64, excess: f64 },

    #[error("missing omega curve for nu = {0}")]
    MissingCurve(usize),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
