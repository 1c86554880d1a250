//! `meta-fit`: learn an initialization over the shifted-bump task family
//! so a few gradient steps adapt it to any member.

use crate::assemble;
use crate::config::RunConfig;
use crate::errors::CliResult;
use crate::model_file::save_model;
use crate::out::{fmt_float, write_atomic, Csv};
use inrf_core::init::build_field;
use inrf_core::objective::Objective;
use inrf_core::rng::Rng;
use inrf_core::train::meta::{bump_family, meta_fit, MetaConfig};

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let (spec, scheme) = assemble::arch(cfg, 1, 1)?;
    let mut field = build_field::<f64>(&spec, &scheme, &mut Rng::new(cfg.seed()))?;

    let meta_cfg = MetaConfig {
        inner_steps: cfg.inner_steps.unwrap_or(3),
        inner_lr: cfg.inner_lr.unwrap_or(1e-2),
        outer_lr: cfg.outer_lr.unwrap_or(1e-4),
        outer_steps: cfg.outer_steps.unwrap_or(1000),
        tasks_per_batch: cfg.tasks_per_batch.unwrap_or(4),
        seed: cfg.seed(),
    };
    let sampler = bump_family::<f64>(cfg.bump_sigma.unwrap_or(0.25), cfg.bump_n.unwrap_or(128));
    let log = meta_fit(&mut field, sampler, &Objective::value(), &meta_cfg)?;

    let mut csv = Csv::new(&["outer_step", "post_adaptation_loss"]);
    for (i, &loss) in log.loss.iter().enumerate() {
        csv.row(&[(i + 1).to_string(), fmt_float(loss)]);
    }
    write_atomic(&cfg.out_dir(), "meta.csv", &csv.into_bytes())?;
    let path = write_atomic(&cfg.out_dir(), "meta.inr", &save_model(&field))?;

    let final_loss = log.loss.last().copied().unwrap_or(f64::NAN);
    if log.diverged {
        println!("meta-fit: diverged at outer step {}; kept the last stable init", log.loss.len());
    }
    println!(
        "meta-fit: {} outer steps, post-adaptation loss {}, wrote {}",
        log.loss.len(),
        fmt_float(final_loss),
        path.display()
    );
    Ok(())
}
