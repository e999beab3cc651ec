//! Error type shared across the crate.

use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Adaptive quadrature ran out of subdivisions before reaching the
    /// requested tolerance. Carries the error estimate that was achieved.
    QuadratureDidNotConverge {
        achieved: f64,
        requested: f64,
        subdivisions: usize,
    },
    /// A parameter violated its domain (non-positive intensity, alpha
    /// outside (0,1), theta outside [0,1], ...).
    InvalidParameter(String),
    /// An empirical CDF needs at least one observation.
    EmptySampleSet,
    /// Chi-square test left with fewer than two bins after tail pooling.
    InsufficientBins,
    /// A sampled CDF curve decreased beyond the numerical slack.
    NonMonotoneCurve { index: usize },
    /// Malformed sample-set file.
    Format(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::QuadratureDidNotConverge {
                achieved,
                requested,
                subdivisions,
            } => write!(
                f,
                "quadrature did not converge after {subdivisions} subdivisions \
                 (achieved error {achieved:.3e}, requested {requested:.3e})"
            ),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::EmptySampleSet => write!(f, "empty sample set"),
            Error::InsufficientBins => {
                write!(f, "fewer than two bins with expected count >= 5 after pooling")
            }
            Error::NonMonotoneCurve { index } => {
                write!(f, "CDF curve decreases at grid index {index}")
            }
            Error::Format(msg) => write!(f, "format error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
