//! Scalar abstraction for the numeric core.
//!
//! Everything below the trainers (matrices, atoms, encoders, forward and
//! derivative propagation, spectra, pyramids) is written against [`Scalar`]
//! so the same code runs at `f32` or `f64`. The shipped tools pin `f64`
//! (see the crate-root aliases); `f32` stays available for callers that
//! want the smaller footprint and can accept the precision.

use crate::analytic::Analytic;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};
use std::iter::Sum;

pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Analytic
    + Display
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// Shorthand for converting an `f64` constant into this scalar type.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
