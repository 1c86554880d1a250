//! Adam fitting loop with loss/PSNR logging and divergence rollback.

use crate::atom::Atom;
use crate::error::Result;
use crate::model::Field;
use crate::objective::{loss_and_grad, value_mse, Objective, SampledSignal};
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::signal::psnr_from_mse;
use crate::train::adam::Adam;

/// Loss above which a run is declared diverged and rolled back.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub steps: usize,
    /// Learning rate; defaults to 1e-4 when any hidden layer uses a
    /// periodic atom (sine, finer) and 1e-3 otherwise.
    pub lr: Option<f64>,
    /// Minibatch size; full-batch when absent.
    pub batch_size: Option<usize>,
    pub seed: u64,
    /// PSNR logging cadence in steps, used when the data has a grid shape.
    pub psnr_every: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { steps: 2000, lr: None, batch_size: None, seed: 0, psnr_every: 50 }
    }
}

/// Per-step loss, periodic PSNR, and whether the run was cut short by
/// divergence (in which case the model holds the last good parameters).
#[derive(Clone, Debug, Default)]
pub struct TrainLog {
    /// loss[k] is the minibatch objective at step k, before that step's
    /// update.
    pub loss: Vec<f64>,
    /// (1-based step, PSNR over the full data) at the configured cadence.
    pub psnr: Vec<(usize, f64)>,
    pub diverged: bool,
}

/// Learning-rate default by atom family.
pub fn default_lr<F: Scalar>(field: &Field<F>) -> f64 {
    let periodic = field
        .net
        .layers
        .iter()
        .any(|l| matches!(l.atom, Atom::Sine { .. } | Atom::Finer { .. }));
    if periodic {
        1e-4
    } else {
        1e-3
    }
}

/// Run Adam on the objective for the configured number of steps.
///
/// A non-finite or > [`DIVERGENCE_LIMIT`] loss (or a non-finite gradient)
/// aborts the run: the field is restored to the most recent parameters
/// that produced an acceptable loss and the log is flagged.
pub fn fit<F: Scalar>(
    field: &mut Field<F>,
    data: &SampledSignal<F>,
    obj: &Objective,
    cfg: &FitConfig,
) -> Result<TrainLog> {
    obj.validate(data)?;
    field.check_derivative_order(obj.required_order())?;
    let lr = cfg.lr.unwrap_or_else(|| default_lr(field));
    let mut adam: Adam<F> = Adam::new(field.param_len(), lr);
    let mut rng = Rng::new(cfg.seed);
    let mut log = TrainLog::default();
    let n = data.len();
    let batch = cfg.batch_size.map(|b| b.max(1).min(n));

    let mut flat = Vec::new();
    field.write_params(&mut flat);
    let mut last_good = flat.clone();

    for step in 0..cfg.steps {
        let step_data;
        let batch_ref = match batch {
            None => data,
            Some(b) => {
                let idx: Vec<usize> =
                    (0..b).map(|_| ((rng.uniform() * n as f64) as usize).min(n - 1)).collect();
                step_data = data.subsample(&idx);
                &step_data
            }
        };
        let (loss, grad) = loss_and_grad(field, batch_ref, obj)?;
        if !loss.is_finite() || loss > DIVERGENCE_LIMIT {
            field.read_params(&last_good);
            log.diverged = true;
            break;
        }
        log.loss.push(loss);
        field.write_params(&mut flat);
        last_good.copy_from_slice(&flat);
        if adam.step(&mut flat, &grad).is_err() {
            field.read_params(&last_good);
            log.diverged = true;
            break;
        }
        field.read_params(&flat);
        if data.grid.is_some() && (step + 1) % cfg.psnr_every.max(1) == 0 {
            let mse = value_mse(field, &data.xs, &data.ys);
            log.psnr.push((step + 1, psnr_from_mse(mse)));
        }
    }
    Ok(log)
}
