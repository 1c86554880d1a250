//! Greedy per-layer activation search over a fixed atom dictionary.
//!
//! Layers are chosen front to back. To score a candidate for layer `l`, a
//! truncated network is built — the already-chosen layers, the candidate
//! layer, and the output head — trained for a short trial budget from a
//! fresh deterministic init, and ranked by full-data value MSE. Trial
//! weights are discarded; only the atom choice survives. After every layer
//! is decided, the full network is rebuilt and trained to completion.

use rayon::prelude::*;

use super::fit::{fit, FitConfig, TrainLog};
use crate::atom::Atom;
use crate::error::{Error, Result};
use crate::init::{build_field, InitScheme};
use crate::model::{Field, FieldSpec, LayerSpec};
use crate::objective::{value_mse, Objective, SampledSignal};
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct MireConfig {
    /// Training steps for each candidate trial.
    pub trial_steps: usize,
    /// Training steps for the final fit with the selected atoms.
    pub final_steps: usize,
    /// Learning rate; `None` picks the atom-dependent default.
    pub lr: Option<f64>,
    /// Minibatch size; `None` trains full-batch.
    pub batch_size: Option<usize>,
    pub seed: u64,
}

impl Default for MireConfig {
    fn default() -> Self {
        MireConfig {
            trial_steps: 300,
            final_steps: 2000,
            lr: None,
            batch_size: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MireOutcome<F: Scalar = f64> {
    /// Selected atom for each hidden layer, front to back.
    pub atoms: Vec<Atom>,
    /// Network trained with the selected atoms.
    pub field: Field<F>,
    /// Trial MSE for every layer x dictionary entry.
    pub trial_losses: Vec<Vec<f64>>,
    /// Log of the final fit.
    pub log: TrainLog,
}

/// Select one atom per hidden layer of `spec` from `dictionary` by greedy
/// trial fits against `data`, then train the selected architecture.
///
/// The atoms in `spec.hidden` are placeholders; widths and the encoder are
/// kept. Ties rank the earlier dictionary entry first.
pub fn mire_select<F: Scalar>(
    spec: &FieldSpec,
    dictionary: &[Atom],
    data: &SampledSignal<F>,
    cfg: &MireConfig,
) -> Result<MireOutcome<F>> {
    spec.validate()?;
    if dictionary.is_empty() {
        return Err(Error::InvalidParam("atom dictionary is empty".into()));
    }
    for atom in dictionary {
        atom.validate()?;
    }

    let depth = spec.hidden.len();
    let n_cand = dictionary.len();
    let obj = Objective::value();

    let mut chosen: Vec<Atom> = Vec::with_capacity(depth);
    let mut trial_losses: Vec<Vec<f64>> = Vec::with_capacity(depth);

    for layer in 0..depth {
        let scores: Vec<f64> = dictionary
            .par_iter()
            .map(|cand| {
                let mut hidden: Vec<LayerSpec> = Vec::with_capacity(layer + 1);
                for (atom, ls) in chosen.iter().zip(&spec.hidden) {
                    hidden.push(LayerSpec { width: ls.width, atom: atom.clone() });
                }
                hidden.push(LayerSpec {
                    width: spec.hidden[layer].width,
                    atom: cand.clone(),
                });
                let trunc = FieldSpec { hidden, ..spec.clone() };
                // Every candidate at this layer starts from the same draw
                // sequence, so identical widths get identical weights and the
                // comparison isolates the atom; identical atoms tie exactly.
                let mut rng = Rng::substream(cfg.seed, layer as u64);
                let mut field = build_field::<F>(&trunc, &InitScheme::Standard, &mut rng)?;
                let fit_cfg = FitConfig {
                    steps: cfg.trial_steps,
                    lr: cfg.lr,
                    batch_size: cfg.batch_size,
                    seed: cfg.seed ^ layer as u64,
                    psnr_every: usize::MAX,
                };
                fit(&mut field, data, &obj, &fit_cfg)?;
                Ok(value_mse(&field, &data.xs, &data.ys))
            })
            .collect::<Result<Vec<f64>>>()?;

        let mut best = 0usize;
        for k in 1..n_cand {
            if scores[k] < scores[best] {
                best = k;
            }
        }
        chosen.push(dictionary[best].clone());
        trial_losses.push(scores);
    }

    let final_spec = FieldSpec {
        hidden: chosen
            .iter()
            .zip(&spec.hidden)
            .map(|(atom, ls)| LayerSpec { width: ls.width, atom: atom.clone() })
            .collect(),
        ..spec.clone()
    };
    let mut rng = Rng::substream(cfg.seed, depth as u64);
    let mut field = build_field::<F>(&final_spec, &InitScheme::Standard, &mut rng)?;
    let fit_cfg = FitConfig {
        steps: cfg.final_steps,
        lr: cfg.lr,
        batch_size: cfg.batch_size,
        seed: cfg.seed ^ depth as u64,
        ..FitConfig::default()
    };
    let log = fit(&mut field, data, &obj, &fit_cfg)?;

    Ok(MireOutcome { atoms: chosen, field, trial_losses, log })
}
