//! `analyze-riesz`: frame bounds, partition-of-unity deviation, and
//! translate-independence classification for one activation atom.

use crate::assemble;
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::out::{fmt_float, write_atomic, Csv};
use inrf_core::analysis::riesz_analyze;

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let name = cfg
        .atom
        .as_deref()
        .ok_or_else(|| CliError::Config("analyze-riesz needs --atom".into()))?;
    let atom = assemble::atom_named(name, cfg)?;
    let report = riesz_analyze(
        &atom,
        cfg.translates.unwrap_or(64),
        cfg.window.unwrap_or(32),
        cfg.density.unwrap_or(64),
    )?;

    let mut csv = Csv::new(&[
        "atom",
        "classification",
        "frame_min",
        "frame_max",
        "pou_deviation",
        "gram_min_singular",
    ]);
    csv.row(&[
        name.to_string(),
        report.classification.name().to_string(),
        fmt_float(report.frame_min),
        fmt_float(report.frame_max),
        fmt_float(report.pou_deviation),
        fmt_float(report.gram_min_singular),
    ]);
    write_atomic(&cfg.out_dir(), "riesz.csv", &csv.into_bytes())?;

    println!(
        "{name}: {} (A={}, B={}, pou={})",
        report.classification.name(),
        fmt_float(report.frame_min),
        fmt_float(report.frame_max),
        fmt_float(report.pou_deviation)
    );
    Ok(())
}
