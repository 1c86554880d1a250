//! Weight initialization schemes and field construction.
//!
//! Random draws happen in a fixed order — encoder first, then each hidden
//! layer's weights row-major followed by its biases (when the scheme draws
//! biases at all), then the output layer's weights — so a (seed, spec,
//! scheme) triple always produces the same field.
//!
//! Schemes:
//! * `standard` — Glorot-uniform weights, zero biases, unit frequency
//!   scales; works with any atom.
//! * `siren(omega0)` — first layer U(+-1/fan_in) with frequency scale
//!   `omega0`, deeper layers U(+-sqrt(6/fan_in)) at unit scale, zero
//!   biases; requires periodic atoms (sine or finer) on every hidden layer.
//! * `siren-reparam(omega0)` — the same draws with every deeper layer's
//!   weights and biases divided by `omega0` and the scale moved into the
//!   layer (`omega = omega0` everywhere); realizes the identical function.
//! * `finer(omega0, k)` — siren draws plus hidden biases U(-k, k), which
//!   spreads the variable-period activation across its frequency range.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Field, FieldSpec, Layer, Mlp};
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum InitScheme {
    Standard,
    Siren { omega0: f64 },
    SirenReparam { omega0: f64 },
    Finer { omega0: f64, k: f64 },
}

impl InitScheme {
    pub fn name(&self) -> &'static str {
        match self {
            InitScheme::Standard => "standard",
            InitScheme::Siren { .. } => "siren",
            InitScheme::SirenReparam { .. } => "siren-reparam",
            InitScheme::Finer { .. } => "finer",
        }
    }

    fn omega0(&self) -> Option<f64> {
        match self {
            InitScheme::Standard => None,
            InitScheme::Siren { omega0 }
            | InitScheme::SirenReparam { omega0 }
            | InitScheme::Finer { omega0, .. } => Some(*omega0),
        }
    }

    pub fn validate(&self, spec: &FieldSpec) -> Result<()> {
        if let Some(omega0) = self.omega0() {
            if !(omega0 > 0.0) {
                return Err(Error::InvalidParam(format!(
                    "{} needs omega0 > 0",
                    self.name()
                )));
            }
            if spec.hidden.is_empty() {
                return Err(Error::Incompatible(format!(
                    "{} initialization needs at least one hidden layer",
                    self.name()
                )));
            }
            for l in &spec.hidden {
                if !matches!(
                    l.atom,
                    crate::atom::Atom::Sine { .. } | crate::atom::Atom::Finer { .. }
                ) {
                    return Err(Error::Incompatible(format!(
                        "{} initialization requires periodic atoms, found '{}'",
                        self.name(),
                        l.atom.name()
                    )));
                }
            }
        }
        if let InitScheme::Finer { k, .. } = self {
            if !(*k >= 0.0) {
                return Err(Error::InvalidParam("finer needs k >= 0".into()));
            }
        }
        Ok(())
    }
}

/// Realize a field: build the encoder, draw weights per the scheme, set
/// per-layer frequency scales.
pub fn build_field<F: Scalar>(
    spec: &FieldSpec,
    scheme: &InitScheme,
    rng: &mut Rng,
) -> Result<Field<F>> {
    spec.validate()?;
    scheme.validate(spec)?;
    let encoder = spec.encoder.build(spec.in_dim, rng)?;

    let mut layers = Vec::with_capacity(spec.hidden.len());
    let mut fan_in = encoder.out_dim();
    for (l, ls) in spec.hidden.iter().enumerate() {
        let fan_out = ls.width;
        let (bound, omega) = match scheme {
            InitScheme::Standard => {
                ((6.0 / (fan_in + fan_out) as f64).sqrt(), 1.0)
            }
            InitScheme::Siren { omega0 } | InitScheme::SirenReparam { omega0 } => {
                if l == 0 {
                    (1.0 / fan_in as f64, *omega0)
                } else {
                    ((6.0 / fan_in as f64).sqrt(), 1.0)
                }
            }
            // A variable-periodic atom must see the raw pre-activation:
            // scaling it by a layer frequency would also scale the |x|
            // factor and square the oscillation rate. The frequency stays
            // inside the atom; deep weights shrink by 1/omega0 so that the
            // argument stays in the atom's near-linear region at init, and
            // the wide bias draw alone controls which oscillatory regime
            // each unit starts in.
            InitScheme::Finer { omega0, .. } => {
                if l == 0 {
                    (1.0 / fan_in as f64, 1.0)
                } else {
                    ((6.0 / fan_in as f64).sqrt() / omega0, 1.0)
                }
            }
        };
        let mut w = Matrix::from_fn(fan_out, fan_in, |_, _| F::c(rng.uniform_in(-bound, bound)));
        let mut b = vec![F::zero(); fan_out];
        if let InitScheme::Finer { k, .. } = scheme {
            for v in &mut b {
                *v = F::c(rng.uniform_in(-*k, *k));
            }
        }
        let mut omega = omega;
        if let InitScheme::SirenReparam { omega0 } = scheme {
            if l > 0 {
                let inv = F::c(1.0 / omega0);
                w.scale(inv);
                for v in &mut b {
                    *v *= inv;
                }
                omega = *omega0;
            }
        }
        layers.push(Layer { w, b, atom: ls.atom.clone(), omega });
        fan_in = fan_out;
    }

    let out_bound = match scheme {
        InitScheme::Standard => (6.0 / (fan_in + spec.out_dim) as f64).sqrt(),
        _ => (6.0 / fan_in as f64).sqrt(),
    };
    let out_w =
        Matrix::from_fn(spec.out_dim, fan_in, |_, _| F::c(rng.uniform_in(-out_bound, out_bound)));
    let out_b = vec![F::zero(); spec.out_dim];

    Ok(Field { encoder, net: Mlp { layers, out_w, out_b } })
}

/// Standard deviation of each hidden layer's frequency-scaled
/// pre-activation `omega * (W h + b)` over a probe batch, in layer order.
/// Useful for checking that an initialization keeps deep layers at a
/// stationary scale: the first layer's scale is set by its frequency
/// factor, while subsequent layers should neither blow up nor collapse.
pub fn hidden_preactivation_stds<F: Scalar>(field: &Field<F>, xs: &Matrix<F>) -> Vec<f64> {
        let n = xs.rows();
    let mut h = Matrix::<F>::zeros(n, field.encoder.out_dim());
    for i in 0..n {
        field.encoder.encode_into(xs.row(i), h.row_mut(i));
    }
    let mut stds = Vec::with_capacity(field.net.layers.len());
    for layer in &field.net.layers {
        let mut u = h.mul_tr(&layer.w);
        let omega = F::c(layer.omega);
        for i in 0..n {
            for (v, &bj) in u.row_mut(i).iter_mut().zip(&layer.b) {
                *v = (*v + bj) * omega;
            }
        }
        let count = (n * layer.w.rows()) as f64;
        let mean = u.data().iter().map(|v| v.primal()).sum::<f64>() / count;
        let var =
            u.data().iter().map(|v| (v.primal() - mean).powi(2)).sum::<f64>() / count;
        stds.push(var.sqrt());
        h = u.map(|v| layer.atom.value(v));
    }
    stds
}
