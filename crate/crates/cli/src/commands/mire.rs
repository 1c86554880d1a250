//! `mire-select`: greedy per-layer atom selection from a dictionary,
//! then a full fit with the chosen sequence.

use crate::assemble;
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::model_file::save_model;
use crate::out::{fmt_float, write_atomic, Csv};
use inrf_core::atom::Atom;
use inrf_core::model::{FieldSpec, LayerSpec};
use inrf_core::train::mire::{mire_select, MireConfig};

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let sig = assemble::load_signal(cfg)?;
    let names = cfg
        .dictionary
        .as_deref()
        .ok_or_else(|| CliError::Config("mire-select needs --dictionary (atom names)".into()))?;
    let dictionary: Vec<Atom> = names
        .split(',')
        .map(|n| assemble::atom_named(n.trim(), cfg))
        .collect::<CliResult<_>>()?;

    let width = cfg.layer_width.unwrap_or(64);
    let depth = cfg.depth.unwrap_or(3);
    let spec = FieldSpec {
        in_dim: sig.in_dim(),
        out_dim: sig.out_dim(),
        encoder: assemble::encoder_spec(cfg)?,
        hidden: vec![LayerSpec { width, atom: dictionary[0].clone() }; depth],
    };
    spec.validate()?;

    let mire_cfg = MireConfig {
        trial_steps: cfg.trial_steps.unwrap_or(300),
        final_steps: cfg.steps.unwrap_or(2000),
        lr: cfg.lr,
        batch_size: cfg.batch,
        seed: cfg.seed(),
    };
    let outcome = mire_select(&spec, &dictionary, &sig.data, &mire_cfg)?;

    let mut csv = Csv::new(&["layer", "atom", "trial_mse", "selected"]);
    for (layer, losses) in outcome.trial_losses.iter().enumerate() {
        let mut sel = 0;
        for (k, &mse) in losses.iter().enumerate() {
            if mse < losses[sel] {
                sel = k;
            }
        }
        for (k, &mse) in losses.iter().enumerate() {
            csv.row(&[
                layer.to_string(),
                dictionary[k].name().to_string(),
                fmt_float(mse),
                ((k == sel) as u8).to_string(),
            ]);
        }
    }
    write_atomic(&cfg.out_dir(), "mire.csv", &csv.into_bytes())?;
    crate::commands::fit::write_metrics(cfg, &outcome.log)?;
    write_atomic(&cfg.out_dir(), "model.inr", &save_model(&outcome.field))?;

    let sequence: Vec<&str> = outcome.atoms.iter().map(|a| a.name()).collect();
    let final_loss = outcome.log.loss.last().copied().unwrap_or(f64::NAN);
    println!("mire-select: {} | final loss {}", sequence.join(","), fmt_float(final_loss));
    Ok(())
}
