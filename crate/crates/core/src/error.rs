//! Crate-wide error type.
//!
//! Variants are grouped by how a front end should report them: bad
//! configuration or incompatible requests, signal I/O problems, and numeric
//! failures discovered mid-computation. Shape mismatches on hot paths are
//! panics (see [`crate::matrix`]), not errors.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter fails its validity rule (non-positive scale, even conv
    /// kernel, pole condition, ...).
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Two otherwise-valid pieces cannot be combined (init scheme vs atom,
    /// grid not divisible by a factor, ...).
    #[error("incompatible request: {0}")]
    Incompatible(String),

    /// A derivative order was requested through a component that is not
    /// smooth enough to support it.
    #[error("unsupported derivative: {0}")]
    UnsupportedDerivative(String),

    /// A forward operator left nothing to fit against.
    #[error("operator produces no measurements (no constraints)")]
    EmptyMeasurement,

    /// NaN or infinity appeared during evaluation.
    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    /// The harmonic probe was asked for frequencies at or above Nyquist.
    #[error("harmonic support reaches bin {k_omega} but only {n} samples were requested; raise the sample count")]
    Nyquist { k_omega: u64, n: usize },

    /// The analysis window truncates too much of the generator's mass for
    /// the report to be trustworthy.
    #[error("window truncation error estimate {estimate:.3e} exceeds {limit:.1e}; enlarge the analysis window")]
    WindowTruncation { estimate: f64, limit: f64 },

    #[error(transparent)]
    Signal(#[from] crate::signal::SignalError),
}

pub type Result<T> = std::result::Result<T, Error>;
