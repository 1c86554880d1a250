//! `fresh-select`: pick an atom frequency by matching the spectrum of a
//! freshly initialized network to the target's spectrum.

use crate::assemble;
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::out::{fmt_float, write_atomic, Csv};
use inrf_core::spectrum::{fresh_select, FreshCandidate};

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let sig = assemble::load_signal(cfg)?;
    let list = cfg.w0_list.as_deref().unwrap_or("5,10,15,20,25,30");
    let w0s = assemble::parse_f64_list(list, "--w0-list")?;
    if w0s.is_empty() {
        return Err(CliError::Config("--w0-list needs at least one frequency".into()));
    }

    let candidates: Vec<FreshCandidate> = w0s
        .iter()
        .map(|&w0| {
            let sub = RunConfig { w0: Some(w0), ..cfg.clone() };
            let (spec, scheme) = assemble::arch(&sub, sig.in_dim(), sig.out_dim())?;
            Ok(FreshCandidate { spec, scheme })
        })
        .collect::<CliResult<_>>()?;

    let outcome = fresh_select(&candidates, &sig.data, sig.grid, cfg.seed())?;

    let mut csv = Csv::new(&["candidate_id", "distance", "selected_flag"]);
    for (i, &d) in outcome.distances.iter().enumerate() {
        csv.row(&[i.to_string(), fmt_float(d), ((i == outcome.selected) as u8).to_string()]);
    }
    write_atomic(&cfg.out_dir(), "fresh.csv", &csv.into_bytes())?;

    let sel = outcome.selected;
    let atom_name = candidates[sel]
        .spec
        .hidden
        .first()
        .map(|l| format!("{}(w0={})", l.atom.name(), w0s[sel]))
        .unwrap_or_else(|| "affine".to_string());
    println!(
        "fresh-select: candidate {sel} {atom_name} at distance {}",
        fmt_float(outcome.distances[sel])
    );
    Ok(())
}
