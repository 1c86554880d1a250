//! `pyramid-fit`: coarse-to-fine image fitting with per-patch nets,
//! reporting PSNR as bands are added.

use crate::assemble;
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::out::{fmt_float, write_atomic, Csv};
use inrf_core::model::FieldSpec;
use inrf_core::signal::pnm::{encode_pnm, read_pnm};
use inrf_core::signal::psnr;
use inrf_core::train::miner::{miner_fit, MinerConfig, MinerModel};
use std::path::Path;

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let path = cfg
        .image
        .as_deref()
        .ok_or_else(|| CliError::Config("pyramid-fit needs --image".into()))?;
    let img = read_pnm(Path::new(path)).map_err(|e| CliError::Io(format!("{path}: {e}")))?;

    let (spec, scheme): (FieldSpec, _) = assemble::arch(cfg, 2, img.channels)?;
    let miner_cfg = MinerConfig {
        levels: cfg.levels.unwrap_or(3),
        patch: cfg.patch.unwrap_or(32),
        tau: cfg.tau.unwrap_or(1e-4),
        steps: cfg.steps.unwrap_or(500),
        lr: cfg.lr,
        seed: cfg.seed(),
    };
    let model: MinerModel = miner_fit(&img, &spec, &scheme, &miner_cfg)?;

    let mut csv = Csv::new(&["bands_included", "psnr", "active_nets"]);
    let mut active = 1usize;
    for k in 0..=model.bands.len() {
        if k > 0 {
            // bands[0] is the finest; band j is added at k = levels - 1 - j.
            active += model.bands[model.bands.len() - k].active_count();
        }
        let rec = model.reconstruct_partial(k);
        let p = psnr(&rec.data, &img.data);
        csv.row(&[k.to_string(), fmt_float(p), active.to_string()]);
    }
    write_atomic(&cfg.out_dir(), "pyramid.csv", &csv.into_bytes())?;

    let rec = model.reconstruct();
    let name = if img.channels == 1 { "recon.pgm" } else { "recon.ppm" };
    write_atomic(&cfg.out_dir(), name, &encode_pnm(&rec))?;

    println!(
        "pyramid-fit: {} levels, {} nets, final psnr {}",
        miner_cfg.levels,
        active,
        fmt_float(psnr(&rec.data, &img.data))
    );
    Ok(())
}
