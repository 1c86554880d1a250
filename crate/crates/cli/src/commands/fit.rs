//! `fit`: train a coordinate network on an image or audio clip, writing
//! the model, a per-step metrics table, and the reconstruction.

use crate::assemble::{self, SignalKind};
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::model_file::save_model;
use crate::out::{fmt_float, write_atomic, Csv};
use inrf_core::init::build_field;
use inrf_core::objective::value_mse;
use inrf_core::operator::{measurement_loss_and_grad, ForwardOperator, Regularizer};
use inrf_core::rng::Rng;
use inrf_core::signal::pnm::encode_pnm;
use inrf_core::signal::sample::image_from_outputs;
use inrf_core::signal::wav::encode_wav;
use inrf_core::signal::{psnr_from_mse, Audio};
use inrf_core::train::adam::Adam;
use inrf_core::train::fit::{default_lr, fit, FitConfig, TrainLog, DIVERGENCE_LIMIT};
use inrf_core::matrix::Matrix;
use inrf_core::model::Field;

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let sig = assemble::load_signal(cfg)?;
    let (spec, scheme) = assemble::arch(cfg, sig.in_dim(), sig.out_dim())?;
    let mut field = build_field::<f64>(&spec, &scheme, &mut Rng::new(cfg.seed()))?;
    let obj = assemble::objective(cfg);
    let steps = cfg.steps.unwrap_or(2000);

    let log = match assemble::operator(cfg, sig.grid)? {
        None => {
            let fit_cfg = FitConfig {
                steps,
                lr: cfg.lr,
                batch_size: cfg.batch,
                seed: cfg.seed(),
                psnr_every: 50,
            };
            fit(&mut field, &sig.data, &obj, &fit_cfg)?
        }
        Some((op, regs)) => {
            if obj.jacobian_weight != 0.0 || obj.laplacian_weight != 0.0 {
                return Err(CliError::Config(
                    "derivative objectives cannot be combined with a measurement operator".into(),
                ));
            }
            measurement_fit(&mut field, &sig.data.xs, &sig.data.ys, sig.grid, &op, &regs, cfg, steps)?
        }
    };

    write_metrics(cfg, &log)?;
    let recon_name = write_recon(cfg, &field, &sig)?;
    let model_path = write_atomic(&cfg.out_dir(), "model.inr", &save_model(&field))?;

    let final_loss = log.loss.last().copied().unwrap_or(f64::NAN);
    if log.diverged {
        println!("fit: diverged at step {}; kept the last stable parameters", log.loss.len());
    }
    println!(
        "fit: {} steps, final loss {}, wrote {}, metrics.csv, {recon_name}",
        log.loss.len(),
        fmt_float(final_loss),
        model_path.display()
    );
    Ok(())
}

/// Adam on the measurement residual, mirroring the plain fit loop's
/// logging and divergence rollback.
#[allow(clippy::too_many_arguments)]
fn measurement_fit(
    field: &mut Field<f64>,
    xs: &Matrix<f64>,
    ys: &Matrix<f64>,
    grid: inrf_core::signal::sample::GridShape,
    op: &ForwardOperator,
    regs: &[Regularizer],
    cfg: &RunConfig,
    steps: usize,
) -> CliResult<TrainLog> {
    let measurements = op.apply(ys, grid)?;
    let lr = cfg.lr.unwrap_or_else(|| default_lr(field));
    let mut adam: Adam<f64> = Adam::new(field.param_len(), lr);
    let mut log = TrainLog::default();
    let mut flat = Vec::new();
    field.write_params(&mut flat);
    let mut last_good = flat.clone();

    for step in 0..steps {
        let (loss, grad) = measurement_loss_and_grad(field, xs, grid, op, &measurements, regs)?;
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
        if (step + 1) % 50 == 0 {
            let mse = value_mse(field, xs, ys);
            log.psnr.push((step + 1, psnr_from_mse(mse)));
        }
    }
    Ok(log)
}

pub fn write_metrics(cfg: &RunConfig, log: &TrainLog) -> CliResult<()> {
    let mut csv = Csv::new(&["step", "loss", "psnr"]);
    let mut psnr_at = log.psnr.iter().peekable();
    for (i, &loss) in log.loss.iter().enumerate() {
        let step = i + 1;
        let psnr_cell = match psnr_at.peek() {
            Some(&&(s, p)) if s == step => {
                psnr_at.next();
                fmt_float(p)
            }
            _ => String::new(),
        };
        csv.row(&[step.to_string(), fmt_float(loss), psnr_cell]);
    }
    write_atomic(&cfg.out_dir(), "metrics.csv", &csv.into_bytes())?;
    Ok(())
}

/// Forward the trained field on the training grid and write it in the
/// input's own format.
fn write_recon(
    cfg: &RunConfig,
    field: &Field<f64>,
    sig: &assemble::LoadedSignal,
) -> CliResult<&'static str> {
    let out = field.forward_batch(&sig.data.xs);
    match sig.kind {
        SignalKind::Image { width, height, channels } => {
            let img = image_from_outputs(width, height, &out);
            debug_assert_eq!(img.channels, channels);
            let name = if channels == 1 { "recon.pgm" } else { "recon.ppm" };
            write_atomic(&cfg.out_dir(), name, &encode_pnm(&img))?;
            Ok(name)
        }
        SignalKind::Audio { rate } => {
            let samples: Vec<f64> =
                (0..out.rows()).map(|i| out[(i, 0)].clamp(-1.0, 1.0)).collect();
            let clip = Audio { sample_rate: rate, samples };
            write_atomic(&cfg.out_dir(), "recon.wav", &encode_wav(&clip))?;
            Ok("recon.wav")
        }
    }
}
