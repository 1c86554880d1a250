//! `probe-harmonics`: drive a polynomial in a pure tone through the DFT
//! and list exactly which integer harmonics come out.

use crate::assemble;
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::out::{fmt_float, write_atomic, Csv};
use inrf_core::analysis::{harmonic_probe, HarmonicProbe};

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let alphas = match cfg.alpha.as_deref() {
        Some(text) => assemble::parse_f64_list(text, "--alpha")?,
        None => return Err(CliError::Config("probe-harmonics needs --alpha (coefficients)".into())),
    };
    let omega = cfg.omega.unwrap_or(1);
    let n = cfg.n.unwrap_or_else(|| {
        // Smallest power of two clear of the aliasing gate.
        let k_omega = (alphas.len().max(1) - 1).max(1) * omega.max(1);
        (2 * k_omega + 1).next_power_of_two().max(64)
    });
    let probe = HarmonicProbe { alphas, omega, n };
    let report = harmonic_probe(&probe)?;

    let mut csv = Csv::new(&["cycles", "magnitude"]);
    for &(cycles, mag) in &report.bins {
        csv.row(&[cycles.to_string(), fmt_float(mag)]);
    }
    write_atomic(&cfg.out_dir(), "harmonics.csv", &csv.into_bytes())?;

    let support: Vec<String> = report.bins.iter().map(|&(c, _)| c.to_string()).collect();
    println!(
        "probe-harmonics: omega={omega}, n={n}, support {{{}}}",
        support.join(", ")
    );
    Ok(())
}
