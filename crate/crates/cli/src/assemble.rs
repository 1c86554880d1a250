//! Builders from a merged [`RunConfig`] to core types: architecture
//! specs, init schemes, objectives, signals, and measurement operators.

use crate::config::{OperatorCfg, RunConfig};
use crate::errors::{CliError, CliResult};
use inrf_core::atom::{self, Atom};
use inrf_core::encoding::EncoderSpec;
use inrf_core::init::InitScheme;
use inrf_core::model::{FieldSpec, LayerSpec};
use inrf_core::objective::{Objective, SampledSignal};
use inrf_core::operator::{ForwardOperator, Regularizer};
use inrf_core::rng::Rng;
use inrf_core::signal::sample::{audio_samples, image_samples, GridShape};
use inrf_core::signal::{pnm, wav};
use std::path::Path;

pub fn parse_f64_list(text: &str, what: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("{what}: '{t}' is not a number")))
        })
        .collect()
}

/// Catalog atom by name with the frequency/shape flags applied. Flags
/// that do not exist on the chosen atom are rejected rather than ignored.
pub fn atom_named(name: &str, cfg: &RunConfig) -> CliResult<Atom> {
    let mut a = atom::by_name(name)
        .ok_or_else(|| CliError::Config(format!("unknown atom '{name}'")))?;
    if let Some(w0) = cfg.w0 {
        match &mut a {
            Atom::Sine { omega }
            | Atom::Finer { omega }
            | Atom::Sinc { omega }
            | Atom::Wire { omega, .. }
            | Atom::Hosc { omega, .. } => *omega = w0,
            _ => {
                return Err(CliError::Config(format!("--w0 does not apply to atom '{name}'")));
            }
        }
    }
    if let Some(s) = cfg.s {
        match &mut a {
            Atom::Gaussian { s: slot } | Atom::Wire { s: slot, .. } => *slot = s,
            _ => return Err(CliError::Config(format!("--s does not apply to atom '{name}'"))),
        }
    }
    if let Some(beta) = cfg.beta {
        match &mut a {
            Atom::Hosc { beta: slot, .. } => *slot = beta,
            _ => {
                return Err(CliError::Config(format!("--beta does not apply to atom '{name}'")));
            }
        }
    }
    a.validate()?;
    Ok(a)
}

pub fn encoder_spec(cfg: &RunConfig) -> CliResult<EncoderSpec> {
    let kind = cfg.encoding.as_deref().unwrap_or("identity");
    match kind {
        "identity" => Ok(EncoderSpec::Identity),
        "ff-gauss" => Ok(EncoderSpec::FourierGauss {
            m: cfg.ff_m.unwrap_or(64),
            sigma: cfg.ff_sigma.unwrap_or(10.0),
            trainable: cfg.ff_trainable.unwrap_or(false),
        }),
        "ff-log" => Ok(EncoderSpec::FourierLog {
            octaves: cfg.ff_octaves.unwrap_or(8),
            trainable: cfg.ff_trainable.unwrap_or(false),
        }),
        "hash" => Ok(EncoderSpec::Hash {
            levels: cfg.hash_levels.unwrap_or(8),
            n0: cfg.hash_n0.unwrap_or(4),
            growth: cfg.hash_growth.unwrap_or(1.7),
            table_size: cfg.hash_table_size.unwrap_or(4096),
            features: cfg.hash_features.unwrap_or(2),
        }),
        other => Err(CliError::Config(format!(
            "unknown encoding '{other}' (expected identity, ff-gauss, ff-log, or hash)"
        ))),
    }
}

/// Hidden stack: `--atoms a,b,c` gives one named atom per layer;
/// otherwise `--atom` (default sine) is repeated `--depth` times.
pub fn hidden_layers(cfg: &RunConfig) -> CliResult<Vec<LayerSpec>> {
    let width = cfg.layer_width.unwrap_or(128);
    let names: Vec<String> = match &cfg.atoms {
        Some(list) => list.split(',').map(|t| t.trim().to_string()).collect(),
        None => {
            let name = cfg.atom.as_deref().unwrap_or("sine").to_string();
            vec![name; cfg.depth.unwrap_or(3)]
        }
    };
    names
        .iter()
        .map(|n| Ok(LayerSpec { width, atom: atom_named(n, cfg)? }))
        .collect()
}

pub fn field_spec(cfg: &RunConfig, in_dim: usize, out_dim: usize) -> CliResult<FieldSpec> {
    let spec = FieldSpec {
        in_dim,
        out_dim,
        encoder: encoder_spec(cfg)?,
        hidden: hidden_layers(cfg)?,
    };
    spec.validate()?;
    Ok(spec)
}

/// The init scheme, defaulting by atom family: sine layers pair with the
/// sine-native scheme, finer layers with its bias-widened variant, and
/// everything else trains from the fan-balanced uniform init.
pub fn init_scheme(cfg: &RunConfig, spec: &FieldSpec) -> CliResult<InitScheme> {
    let intrinsic = spec.hidden.first().and_then(|l| match l.atom {
        Atom::Sine { omega } | Atom::Finer { omega } => Some(omega),
        _ => None,
    });
    let omega0 = cfg.w0.or(intrinsic).unwrap_or(30.0);
    let name = match cfg.scheme.as_deref() {
        Some(n) => n.to_string(),
        None => match spec.hidden.first().map(|l| &l.atom) {
            Some(Atom::Sine { .. }) => "siren".to_string(),
            Some(Atom::Finer { .. }) => "finer".to_string(),
            _ => "standard".to_string(),
        },
    };
    match name.as_str() {
        "standard" => Ok(InitScheme::Standard),
        "siren" => Ok(InitScheme::Siren { omega0 }),
        "siren-reparam" => Ok(InitScheme::SirenReparam { omega0 }),
        "finer" => Ok(InitScheme::Finer { omega0, k: cfg.finer_k.unwrap_or(1.0) }),
        other => Err(CliError::Config(format!(
            "unknown scheme '{other}' (expected standard, siren, siren-reparam, or finer)"
        ))),
    }
}

/// Builds the field spec together with its initialization scheme.
///
/// Under the siren schemes the frequency scale belongs to the scheme's
/// first-layer omega, so periodic atoms are normalized to unit intrinsic
/// frequency; stacking both would square the scale. The finer scheme is
/// the opposite case: its variable-periodic mechanism needs the frequency
/// inside the atom, so atoms are left untouched there, as under standard
/// init.
pub fn arch(
    cfg: &RunConfig,
    in_dim: usize,
    out_dim: usize,
) -> CliResult<(FieldSpec, InitScheme)> {
    let mut spec = field_spec(cfg, in_dim, out_dim)?;
    let scheme = init_scheme(cfg, &spec)?;
    if matches!(scheme, InitScheme::Siren { .. } | InitScheme::SirenReparam { .. }) {
        for l in &mut spec.hidden {
            if let Atom::Sine { omega } | Atom::Finer { omega } = &mut l.atom {
                *omega = 1.0;
            }
        }
    }
    Ok((spec, scheme))
}

pub fn objective(cfg: &RunConfig) -> Objective {
    Objective {
        value_weight: cfg.value_weight.unwrap_or(1.0),
        jacobian_weight: cfg.jacobian_weight.unwrap_or(0.0),
        laplacian_weight: cfg.laplacian_weight.unwrap_or(0.0),
    }
}

/// What the fitted signal was, for writing reconstructions back out.
pub enum SignalKind {
    Image { width: usize, height: usize, channels: usize },
    Audio { rate: u32 },
}

pub struct LoadedSignal {
    pub data: SampledSignal<f64>,
    pub grid: GridShape,
    pub kind: SignalKind,
}

impl LoadedSignal {
    pub fn in_dim(&self) -> usize {
        self.data.xs.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.data.ys.cols()
    }
}

/// Load `--image` or `--audio` (exactly one) as a coordinate/value table
/// on the pixel-center grid.
pub fn load_signal(cfg: &RunConfig) -> CliResult<LoadedSignal> {
    match (&cfg.image, &cfg.audio) {
        (Some(_), Some(_)) => {
            Err(CliError::Config("--image and --audio are mutually exclusive".into()))
        }
        (None, None) => Err(CliError::Config("an input signal is required (--image or --audio)".into())),
        (Some(path), None) => {
            let img = pnm::read_pnm(Path::new(path))
                .map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            let (xs, ys) = image_samples::<f64>(&img);
            let grid = GridShape::Two(img.width, img.height);
            let data = SampledSignal::new(xs, ys)?.with_grid(grid)?;
            Ok(LoadedSignal {
                data,
                grid,
                kind: SignalKind::Image {
                    width: img.width,
                    height: img.height,
                    channels: img.channels,
                },
            })
        }
        (None, Some(path)) => {
            let clip = wav::read_wav(Path::new(path))
                .map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            let (xs, ys) = audio_samples::<f64>(&clip);
            let grid = GridShape::One(clip.samples.len());
            let data = SampledSignal::new(xs, ys)?.with_grid(grid)?;
            Ok(LoadedSignal { data, grid, kind: SignalKind::Audio { rate: clip.sample_rate } })
        }
    }
}

/// The measurement operator and regularizer stack, when any is configured.
pub fn operator(
    cfg: &RunConfig,
    grid: GridShape,
) -> CliResult<Option<(ForwardOperator, Vec<Regularizer>)>> {
    let mut regs = Vec::new();
    if let Some(lambda) = cfg.weight_decay {
        regs.push(Regularizer::WeightDecay { lambda });
    }
    if let Some(lambda) = cfg.tv {
        regs.push(Regularizer::Tv { lambda });
    }
    let op = match &cfg.operator {
        None if regs.is_empty() => return Ok(None),
        None | Some(OperatorCfg::Identity) => ForwardOperator::Identity,
        Some(OperatorCfg::Mask { keep_ratio, seed }) => {
            if !(*keep_ratio > 0.0 && *keep_ratio <= 1.0) {
                return Err(CliError::Config(format!(
                    "mask keep_ratio must be in (0, 1], got {keep_ratio}"
                )));
            }
            let mut rng = Rng::new(*seed);
            let flags: Vec<bool> = (0..grid.len()).map(|_| rng.uniform() < *keep_ratio).collect();
            ForwardOperator::Mask(flags)
        }
        Some(OperatorCfg::Conv { kernel }) => ForwardOperator::Conv(kernel.clone()),
        Some(OperatorCfg::Downsample { factor }) => ForwardOperator::Downsample(*factor),
    };
    op.validate(grid)?;
    Ok(Some((op, regs)))
}

/// Parse an inline `--operator` JSON value.
pub fn operator_json(text: &str) -> CliResult<OperatorCfg> {
    serde_json::from_str(text)
        .map_err(|e| CliError::Config(format!("--operator: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w0_rejects_atoms_without_a_frequency() {
        let cfg = RunConfig { w0: Some(30.0), ..RunConfig::default() };
        assert!(atom_named("relu", &cfg).is_err());
        assert!(matches!(atom_named("sine", &cfg), Ok(Atom::Sine { omega }) if omega == 30.0));
    }

    #[test]
    fn atoms_list_overrides_depth() {
        let cfg = RunConfig {
            atoms: Some("relu,gaussian".into()),
            depth: Some(5),
            layer_width: Some(10),
            ..RunConfig::default()
        };
        let layers = hidden_layers(&cfg).unwrap();
        assert_eq!(layers.len(), 2);
        assert_eq!(layers[0].atom, Atom::Relu);
        assert!(matches!(layers[1].atom, Atom::Gaussian { .. }));
    }

    #[test]
    fn scheme_defaults_track_the_first_atom() {
        let sine = field_spec(&RunConfig::default(), 1, 1).unwrap();
        assert!(matches!(
            init_scheme(&RunConfig::default(), &sine).unwrap(),
            InitScheme::Siren { omega0 } if omega0 == 30.0
        ));
        let cfg = RunConfig { atom: Some("relu".into()), ..RunConfig::default() };
        let relu = field_spec(&cfg, 1, 1).unwrap();
        assert_eq!(init_scheme(&cfg, &relu).unwrap(), InitScheme::Standard);
    }

    #[test]
    fn inline_operator_json_parses() {
        let op = operator_json("{\"op\":\"mask\",\"keep_ratio\":0.25,\"seed\":4}").unwrap();
        assert_eq!(op, OperatorCfg::Mask { keep_ratio: 0.25, seed: 4 });
        assert!(operator_json("{\"op\":\"mask\"}").is_err());
    }
}
