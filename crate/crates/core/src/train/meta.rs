//! Meta-initialization: learn parameters that adapt to a task family in a
//! few plain gradient-descent steps.
//!
//! `adapt` is the inner loop — exactly `steps` full-batch GD updates at
//! rate `alpha`, no momentum, no state. `meta_fit` trains the shared
//! initialization with a first-order meta-gradient: each outer step samples
//! a batch of tasks, adapts a copy per task, and feeds the post-adaptation
//! gradients (averaged) to an outer Adam. The second-order term through the
//! inner updates is dropped.

use crate::error::Result;
use crate::matrix::Matrix;
use crate::model::Field;
use crate::objective::{loss_and_grad, Objective, SampledSignal};
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::signal::sample;
use crate::train::adam::Adam;
use crate::train::fit::{TrainLog, DIVERGENCE_LIMIT};
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct MetaConfig {
    /// Inner GD steps applied when adapting to a task.
    pub inner_steps: usize,
    /// Inner learning rate; 0 makes adaptation a no-op.
    pub inner_lr: f64,
    pub outer_lr: f64,
    pub outer_steps: usize,
    pub tasks_per_batch: usize,
    pub seed: u64,
}

impl Default for MetaConfig {
    fn default() -> Self {
        MetaConfig {
            inner_steps: 3,
            inner_lr: 1e-2,
            outer_lr: 1e-4,
            outer_steps: 1000,
            tasks_per_batch: 4,
            seed: 0,
        }
    }
}

/// Adapt a copy of the field to one task: exactly `steps` plain
/// gradient-descent updates at rate `alpha`. Deterministic in its inputs.
pub fn adapt<F: Scalar>(
    field: &Field<F>,
    task: &SampledSignal<F>,
    obj: &Objective,
    steps: usize,
    alpha: f64,
) -> Result<Field<F>> {
    let mut adapted = field.clone();
    let mut flat = Vec::new();
    adapted.write_params(&mut flat);
    let a = F::c(alpha);
    for _ in 0..steps {
        let (_, grad) = loss_and_grad(&adapted, task, obj)?;
        for (p, g) in flat.iter_mut().zip(&grad) {
            *p -= a * *g;
        }
        adapted.read_params(&flat);
    }
    Ok(adapted)
}

/// Train the initialization so that `inner_steps` of GD reach a low task
/// loss across the family. The sampler draws one task per call from the
/// outer RNG; tasks within a batch run in parallel and are reduced in
/// draw order. Divergence aborts with the last good parameters, as in
/// [`crate::train::fit`].
pub fn meta_fit<F: Scalar>(
    field: &mut Field<F>,
    sampler: impl Fn(&mut Rng) -> SampledSignal<F> + Sync,
    obj: &Objective,
    cfg: &MetaConfig,
) -> Result<TrainLog> {
    let mut rng = Rng::new(cfg.seed);
    let mut adam: Adam<F> = Adam::new(field.param_len(), cfg.outer_lr);
    let mut log = TrainLog::default();
    let mut flat = Vec::new();
    field.write_params(&mut flat);
    let mut last_good = flat.clone();

    for _ in 0..cfg.outer_steps {
        let tasks: Vec<SampledSignal<F>> =
            (0..cfg.tasks_per_batch.max(1)).map(|_| sampler(&mut rng)).collect();
        let cur: &Field<F> = field;
        let per_task: Vec<Result<(f64, Vec<F>)>> = tasks
            .par_iter()
            .map(|task| {
                let adapted = adapt(cur, task, obj, cfg.inner_steps, cfg.inner_lr)?;
                loss_and_grad(&adapted, task, obj)
            })
            .collect();
        let mut loss = 0.0;
        let mut grad = vec![F::zero(); flat.len()];
        for r in per_task {
            let (l, g) = r?;
            loss += l;
            for (acc, v) in grad.iter_mut().zip(&g) {
                *acc += *v;
            }
        }
        let inv = F::c(1.0 / tasks.len() as f64);
        loss /= tasks.len() as f64;
        for g in &mut grad {
            *g *= inv;
        }
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
    }
    Ok(log)
}

/// One task from the bump family: a unit-height Gaussian centered at `mu`,
/// sampled on a regular n-point grid over [-1, 1].
pub fn gaussian_bump_task<F: Scalar>(mu: f64, sigma: f64, n: usize) -> SampledSignal<F> {
    let xs = sample::grid_1d::<F>(n);
    let ys = Matrix::from_fn(n, 1, |i, _| {
        let x = xs[(i, 0)].primal();
        F::c((-(x - mu) * (x - mu) / (2.0 * sigma * sigma)).exp())
    });
    SampledSignal::new(xs, ys).expect("n >= 1")
}

/// Sampler over bump tasks with centers uniform in [-0.5, 0.5].
pub fn bump_family<F: Scalar>(
    sigma: f64,
    n: usize,
) -> impl Fn(&mut Rng) -> SampledSignal<F> + Sync {
    move |rng: &mut Rng| gaussian_bump_task(rng.uniform_in(-0.5, 0.5), sigma, n)
}
