//! Closed-form math that has to run on more than one number-like type.
//!
//! Activation atoms expose value, first, and second derivative as explicit
//! formulas. Those same formulas are needed twice: once on plain floats
//! (forward evaluation, input-derivative propagation, analysis probes) and
//! once on reverse-mode tape values (parameter gradients of objectives that
//! supervise input derivatives, where the tape differentiates *through* the
//! formulas). [`Analytic`] is the shared vocabulary, so each formula is
//! written exactly once.
//!
//! `primal` exposes the underlying value for branch decisions (piecewise
//! definitions, removable singularities). Branching on the primal and then
//! recording only the taken branch is exactly what reverse-mode needs for
//! piecewise-analytic functions.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Analytic:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant in the same evaluation context as `self` (same tape, or
    /// just the converted float for plain scalars).
    fn konst(self, c: f64) -> Self;

    /// Underlying numeric value. Only for branch decisions; using it as an
    /// operand would silently detach gradients.
    fn primal(self) -> f64;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn tanh(self) -> Self;

    fn sq(self) -> Self {
        self * self
    }

    fn abs(self) -> Self {
        if self.primal() < 0.0 {
            -self
        } else {
            self
        }
    }

    fn relu(self) -> Self {
        if self.primal() > 0.0 {
            self
        } else {
            self.konst(0.0)
        }
    }
}

macro_rules! impl_analytic_for_float {
    ($t:ty) => {
        impl Analytic for $t {
            fn konst(self, c: f64) -> Self {
                c as $t
            }
            fn primal(self) -> f64 {
                self as f64
            }
            fn sin(self) -> Self {
                <$t>::sin(self)
            }
            fn cos(self) -> Self {
                <$t>::cos(self)
            }
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            fn tanh(self) -> Self {
                <$t>::tanh(self)
            }
        }
    };
}

impl_analytic_for_float!(f32);
impl_analytic_for_float!(f64);
