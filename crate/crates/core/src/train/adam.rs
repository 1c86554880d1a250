//! Adam over a flat parameter vector.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPS: f64 = 1e-8;

/// Bias-corrected Adam state; moments are shaped like the parameters.
#[derive(Clone, Debug)]
pub struct Adam<F: Scalar = f64> {
    lr: f64,
    t: u64,
    m: Vec<F>,
    v: Vec<F>,
}

impl<F: Scalar> Adam<F> {
    pub fn new(len: usize, lr: f64) -> Adam<F> {
        Adam { lr, t: 0, m: vec![F::zero(); len], v: vec![F::zero(); len] }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.lr = lr;
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One update in place. Rejects non-finite gradients before touching
    /// any state, so the parameters stay usable after the error.
    pub fn step(&mut self, params: &mut [F], grad: &[F]) -> Result<()> {
        assert_eq!(params.len(), self.m.len(), "parameter count changed");
        assert_eq!(grad.len(), self.m.len(), "gradient count mismatch");
        if grad.iter().any(|g| !g.primal().is_finite()) {
            return Err(Error::NonFinite { context: "gradient entering optimizer step".into() });
        }
        self.t += 1;
        let b1 = F::c(BETA1);
        let b2 = F::c(BETA2);
        let ob1 = F::c(1.0 - BETA1);
        let ob2 = F::c(1.0 - BETA2);
        let c1 = F::c(1.0 / (1.0 - BETA1.powi(self.t as i32)));
        let c2 = F::c(1.0 / (1.0 - BETA2.powi(self.t as i32)));
        let lr = F::c(self.lr);
        let eps = F::c(EPS);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = b1 * self.m[i] + ob1 * g;
            self.v[i] = b2 * self.v[i] + ob2 * g * g;
            let mhat = self.m[i] * c1;
            let vhat = self.v[i] * c2;
            params[i] -= lr * mhat / (vhat.sqrt() + eps);
        }
        Ok(())
    }
}
