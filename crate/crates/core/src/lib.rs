//! Fitting coordinate networks to signals, with exact input-space derivatives
//! and the spectral tooling (encodings, activation atoms, initializers,
//! analysis probes) needed to reason about what such networks can represent.
//!
//! The numeric foundation is generic over the scalar type (see [`Scalar`]);
//! concrete `f64` aliases are exported at the crate root and are what the
//! trainers, analysis passes, and file formats use.

pub mod analytic;
pub mod atom;
pub mod encoding;
pub mod error;
pub mod init;
pub mod matrix;
pub mod model;
pub mod objective;
pub mod operator;
pub mod rng;
pub mod scalar;
pub mod signal;
pub mod spectrum;
pub mod tape;
pub mod train;

pub mod analysis;

pub use error::Error;
pub use scalar::Scalar;

/// Scalar type used by every shipped interface (trainers, file formats, CLI).
pub type Real = f64;

/// Dense row-major matrix over [`Real`].
pub type Matrix = matrix::Matrix<Real>;

/// Coordinate network over [`Real`]: encoder plus MLP.
pub type Field = model::Field<Real>;

/// MLP over [`Real`].
pub type Mlp = model::Mlp<Real>;

/// Encoder over [`Real`].
pub type Encoder = encoding::Encoder<Real>;
