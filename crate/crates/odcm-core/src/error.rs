//! Error type shared by all numerics modules.

use alloc::string::String;
use core::fmt;

/// Errors raised by the numerics core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A constructor parameter violates its precondition.
    InvalidParameter(String),
    /// Input data (grids, sample arrays, descriptors) is malformed.
    InvalidInput(String),
    /// A Fourier integration window ended before the integrand decayed.
    Truncation(String),
    /// A quadrature result is inconsistent with the declared input class
    /// (e.g. a significantly negative spectrum value).
    InconsistentInput(String),
    /// Requested pulse-train parameters cannot be realized (pulses overlap).
    InfeasibleParameters(String),
    /// The energy budget is too small to place a single pulse.
    EnergyTooSmall(String),
    /// The frequency grid does not cover the spectrum's support.
    Coverage(String),
    /// The unmodulated rate is below the floor; normalization is undefined.
    DegenerateNormalization(String),
    /// The Euler-Lagrange denominator collapsed: the current phase is at the
    /// trivial stationary point and a different initial guess is required.
    DegenerateStationaryPoint(String),
    /// The discretized linear operator is numerically singular.
    IllPosed { detail: String, condition_estimate: f64 },
    /// The Lagrange-multiplier scan found no sign change; the scanned
    /// (lambda, energy) table is attached for diagnosis.
    BracketFailure { detail: String, scan: alloc::vec::Vec<(f64, f64)> },
    /// Positivity clipping removed the entire field.
    DegenerateField(String),
    /// The sampled covariance matrix is indefinite beyond the clamp tolerance.
    InvalidCovariance(String),
    /// Two objects that must share a grid do not.
    GridMismatch(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Error::Truncation(m) => write!(f, "truncation error: {m}"),
            Error::InconsistentInput(m) => write!(f, "inconsistent input: {m}"),
            Error::InfeasibleParameters(m) => write!(f, "infeasible parameters: {m}"),
            Error::EnergyTooSmall(m) => write!(f, "energy too small: {m}"),
            Error::Coverage(m) => write!(f, "coverage error: {m}"),
            Error::DegenerateNormalization(m) => write!(f, "degenerate normalization: {m}"),
            Error::DegenerateStationaryPoint(m) => {
                write!(f, "degenerate stationary point: {m}")
            }
            Error::IllPosed { detail, condition_estimate } => {
                write!(f, "ill-posed system (cond ~ {condition_estimate:.3e}): {detail}")
            }
            Error::BracketFailure { detail, scan } => {
                write!(f, "bracket failure: {detail} ({} points scanned)", scan.len())
            }
            Error::DegenerateField(m) => write!(f, "degenerate field: {m}"),
            Error::InvalidCovariance(m) => write!(f, "invalid covariance: {m}"),
            Error::GridMismatch(m) => write!(f, "grid mismatch: {m}"),
        }
    }
}

impl core::error::Error for Error {}
