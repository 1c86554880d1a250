//! Convergence-order probe on a two-tone target.
//!
//! A network is trained against y(t) = a_lo·sin(2π f_lo t) + a_hi·sin(2π f_hi t)
//! sampled uniformly, and at fixed checkpoints the residual is projected onto
//! the two target bins of the DFT. Each band's curve is the residual
//! amplitude relative to that band's target amplitude, in dB, so 0 dB means
//! untouched and -20 dB means the band is fit to 1% energy. Comparing the
//! first checkpoint at which each band crosses a threshold exposes which
//! frequencies the optimizer serves first.

use crate::error::{Error, Result};
use crate::init::{build_field, InitScheme};
use crate::matrix::Matrix;
use crate::model::FieldSpec;
use crate::objective::{loss_and_grad, Objective, SampledSignal};
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::signal::sample::grid_1d;
use crate::spectrum::dft;
use crate::train::{Adam, fit::default_lr};

/// Floor for the amplitude ratio inside the dB conversion; an exactly zero
/// residual reads as -300 dB instead of -inf.
pub const DB_FLOOR_RATIO: f64 = 1e-15;

#[derive(Clone, Debug)]
pub struct BiasProbeConfig {
    /// Low tone, in cycles over the sampled interval.
    pub f_lo: usize,
    /// High tone, in cycles over the sampled interval.
    pub f_hi: usize,
    /// Uniform sample count.
    pub n: usize,
    pub amp_lo: f64,
    pub amp_hi: f64,
    pub steps: usize,
    /// Residuals are projected every this many steps (and at 0 and the end).
    pub checkpoint_every: usize,
    /// Learning rate; `None` picks the atom-dependent default.
    pub lr: Option<f64>,
    pub seed: u64,
}

impl Default for BiasProbeConfig {
    fn default() -> Self {
        BiasProbeConfig {
            f_lo: 1,
            f_hi: 32,
            n: 512,
            amp_lo: 1.0,
            amp_hi: 1.0,
            steps: 5000,
            checkpoint_every: 50,
            lr: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BiasCurves {
    /// Checkpoint step numbers, starting at 0.
    pub steps: Vec<usize>,
    /// Low-band residual level per checkpoint, dB.
    pub low_db: Vec<f64>,
    /// High-band residual level per checkpoint, dB.
    pub high_db: Vec<f64>,
}

/// The probe's target signal: both tones sampled on the 1D pixel-center grid.
pub fn two_tone_target<F: Scalar>(cfg: &BiasProbeConfig) -> Result<SampledSignal<F>> {
    validate(cfg)?;
    let xs = grid_1d::<F>(cfg.n);
    let ys = Matrix::from_fn(cfg.n, 1, |i, _| {
        let t = (xs.row(i)[0].primal() + 1.0) / 2.0;
        let tau = std::f64::consts::TAU;
        F::c(cfg.amp_lo * (tau * cfg.f_lo as f64 * t).sin()
            + cfg.amp_hi * (tau * cfg.f_hi as f64 * t).sin())
    });
    SampledSignal::new(xs, ys)
}

fn validate(cfg: &BiasProbeConfig) -> Result<()> {
    if cfg.f_lo >= cfg.f_hi {
        return Err(Error::InvalidParam("bias probe needs f_lo < f_hi".into()));
    }
    if cfg.f_hi as u64 >= (cfg.n / 2) as u64 {
        return Err(Error::Nyquist { k_omega: cfg.f_hi as u64, n: cfg.n });
    }
    if cfg.n < 8 {
        return Err(Error::InvalidParam("bias probe needs at least 8 samples".into()));
    }
    if !(cfg.amp_lo.is_finite() && cfg.amp_hi.is_finite() && cfg.amp_lo >= 0.0 && cfg.amp_hi >= 0.0)
    {
        return Err(Error::InvalidParam("band amplitudes must be finite and >= 0".into()));
    }
    if cfg.steps == 0 || cfg.checkpoint_every == 0 {
        return Err(Error::InvalidParam("bias probe needs steps, checkpoint_every >= 1".into()));
    }
    Ok(())
}

/// Train `spec` under `scheme` on the two-tone target and log per-band
/// residual levels at every checkpoint.
pub fn spectral_bias_probe<F: Scalar>(
    spec: &FieldSpec,
    scheme: &InitScheme,
    cfg: &BiasProbeConfig,
) -> Result<BiasCurves> {
    let data = two_tone_target::<F>(cfg)?;
    let obj = Objective::value();
    obj.validate(&data)?;

    let mut rng = Rng::substream(cfg.seed, 0);
    let mut field = build_field::<F>(spec, scheme, &mut rng)?;
    let lr = cfg.lr.unwrap_or_else(|| default_lr(&field));
    let mut flat: Vec<F> = Vec::new();
    field.write_params(&mut flat);
    let mut adam = Adam::<F>::new(flat.len(), lr);

    let mut curves = BiasCurves { steps: Vec::new(), low_db: Vec::new(), high_db: Vec::new() };
    let record = |field: &crate::model::Field<F>, step: usize, curves: &mut BiasCurves| {
        let pred = field.forward_batch(&data.xs);
        let residual: Vec<f64> = (0..cfg.n)
            .map(|i| pred.row(i)[0].primal() - data.ys.row(i)[0].primal())
            .collect();
        let spectrum = dft(&residual);
        let scale = 2.0 / cfg.n as f64;
        let ratio = |f: usize, amp: f64| {
            let ref_amp = if amp > 0.0 { amp } else { 1.0 };
            let r = spectrum[f].norm() * scale / ref_amp;
            20.0 * r.max(DB_FLOOR_RATIO).log10()
        };
        curves.steps.push(step);
        curves.low_db.push(ratio(cfg.f_lo, cfg.amp_lo));
        curves.high_db.push(ratio(cfg.f_hi, cfg.amp_hi));
    };

    record(&field, 0, &mut curves);
    for step in 1..=cfg.steps {
        let (loss, grad) = loss_and_grad(&field, &data, &obj)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite { context: format!("bias probe loss at step {step}") });
        }
        field.write_params(&mut flat);
        adam.step(&mut flat, &grad)?;
        field.read_params(&flat);
        if step % cfg.checkpoint_every == 0 || step == cfg.steps {
            record(&field, step, &mut curves);
        }
    }
    Ok(curves)
}

/// First checkpoint step at which the curve is at or below `threshold_db`.
pub fn steps_to_threshold(steps: &[usize], db: &[f64], threshold_db: f64) -> Option<usize> {
    steps
        .iter()
        .zip(db)
        .find(|(_, &v)| v <= threshold_db)
        .map(|(&s, _)| s)
}
