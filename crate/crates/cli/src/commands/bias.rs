//! `probe-spectral-bias`: train on a two-tone target and log per-band
//! residual levels, exposing which frequencies the architecture learns
//! first.

use crate::assemble;
use crate::config::RunConfig;
use crate::errors::CliResult;
use crate::out::{fmt_float, write_atomic, Csv};
use inrf_core::analysis::{spectral_bias_probe, steps_to_threshold, BiasProbeConfig};

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let (spec, scheme) = assemble::arch(cfg, 1, 1)?;
    let probe_cfg = BiasProbeConfig {
        f_lo: cfg.f_lo.unwrap_or(1),
        f_hi: cfg.f_hi.unwrap_or(32),
        n: cfg.n.unwrap_or(512),
        amp_lo: cfg.amp_lo.unwrap_or(1.0),
        amp_hi: cfg.amp_hi.unwrap_or(1.0),
        steps: cfg.steps.unwrap_or(5000),
        checkpoint_every: cfg.checkpoint_every.unwrap_or(50),
        lr: cfg.lr,
        seed: cfg.seed(),
    };
    let curves = spectral_bias_probe::<f64>(&spec, &scheme, &probe_cfg)?;

    let mut csv = Csv::new(&["step", "low_db", "high_db"]);
    for (i, &step) in curves.steps.iter().enumerate() {
        csv.row(&[step.to_string(), fmt_float(curves.low_db[i]), fmt_float(curves.high_db[i])]);
    }
    write_atomic(&cfg.out_dir(), "bias.csv", &csv.into_bytes())?;

    let describe = |band: &str, db: &[f64]| match steps_to_threshold(&curves.steps, db, -20.0) {
        Some(s) => format!("{band} band reaches -20 dB at step {s}"),
        None => format!("{band} band never reaches -20 dB"),
    };
    println!(
        "probe-spectral-bias: f={}/{}: {}; {}",
        probe_cfg.f_lo,
        probe_cfg.f_hi,
        describe("low", &curves.low_db),
        describe("high", &curves.high_db)
    );
    Ok(())
}
