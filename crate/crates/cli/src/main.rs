//! `inrf`: fit coordinate networks to signals and probe their spectral
//! behavior. Every command takes `--config run.json` (flags override the
//! file), honors `--seed` and `--out-dir`, writes output files atomically,
//! and prints floats with nine significant digits.

mod assemble;
mod commands;
mod config;
mod errors;
mod model_file;
mod out;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use errors::{CliError, CliResult};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "inrf",
    version,
    about = "Fit continuous coordinate networks to images, audio, and synthetic signals"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// JSON config file; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the merged configuration as JSON and exit without running.
    #[arg(long, global = true)]
    dump_config: bool,
    /// Directory receiving every output file (created if missing).
    #[arg(long)]
    out_dir: Option<String>,
    /// Seed for every random draw in the run.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Default)]
struct ArchArgs {
    /// Coordinate encoding: identity, ff-gauss, ff-log, or hash.
    #[arg(long)]
    encoding: Option<String>,
    /// Fourier feature count (ff-gauss rows).
    #[arg(long)]
    ff_m: Option<usize>,
    /// Frequency standard deviation for ff-gauss.
    #[arg(long)]
    ff_sigma: Option<f64>,
    /// Octave count for ff-log.
    #[arg(long)]
    ff_octaves: Option<usize>,
    /// Train the frequency matrix itself.
    #[arg(long)]
    ff_trainable: Option<bool>,
    #[arg(long)]
    hash_levels: Option<usize>,
    #[arg(long)]
    hash_n0: Option<u32>,
    #[arg(long)]
    hash_growth: Option<f64>,
    #[arg(long)]
    hash_table_size: Option<usize>,
    #[arg(long)]
    hash_features: Option<usize>,
    /// Activation atom used on every hidden layer.
    #[arg(long)]
    atom: Option<String>,
    /// Comma-separated atom per layer; overrides --atom/--depth.
    #[arg(long)]
    atoms: Option<String>,
    /// Frequency parameter: the atom's omega and the periodic schemes' omega0.
    #[arg(long)]
    w0: Option<f64>,
    /// Width/decay parameter for gaussian and wire atoms.
    #[arg(long)]
    s: Option<f64>,
    /// Saturation gain for the hosc atom.
    #[arg(long)]
    beta: Option<f64>,
    /// Hidden layer width.
    #[arg(long)]
    layer_width: Option<usize>,
    /// Hidden layer count.
    #[arg(long)]
    depth: Option<usize>,
    /// Init scheme: standard, siren, siren-reparam, or finer
    /// (default follows the first atom).
    #[arg(long)]
    scheme: Option<String>,
    /// Bias range for the finer scheme.
    #[arg(long)]
    finer_k: Option<f64>,
}

impl ArchArgs {
    fn fill(self, cfg: &mut RunConfig) {
        cfg.encoding = self.encoding;
        cfg.ff_m = self.ff_m;
        cfg.ff_sigma = self.ff_sigma;
        cfg.ff_octaves = self.ff_octaves;
        cfg.ff_trainable = self.ff_trainable;
        cfg.hash_levels = self.hash_levels;
        cfg.hash_n0 = self.hash_n0;
        cfg.hash_growth = self.hash_growth;
        cfg.hash_table_size = self.hash_table_size;
        cfg.hash_features = self.hash_features;
        cfg.atom = self.atom;
        cfg.atoms = self.atoms;
        cfg.w0 = self.w0;
        cfg.s = self.s;
        cfg.beta = self.beta;
        cfg.layer_width = self.layer_width;
        cfg.depth = self.depth;
        cfg.scheme = self.scheme;
        cfg.finer_k = self.finer_k;
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Train a network on an image or audio clip.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        arch: ArchArgs,
        /// Input image (binary PGM/PPM).
        #[arg(long)]
        image: Option<String>,
        /// Input audio (PCM16 mono WAV).
        #[arg(long)]
        audio: Option<String>,
        /// Adam steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Learning rate (default 1e-4 for periodic atoms, 1e-3 otherwise).
        #[arg(long)]
        lr: Option<f64>,
        /// Minibatch size (full-batch when absent).
        #[arg(long)]
        batch: Option<usize>,
        /// Weight on the value MSE term.
        #[arg(long)]
        value_weight: Option<f64>,
        /// Weight on the jacobian MSE term (needs derivative targets).
        #[arg(long)]
        jacobian_weight: Option<f64>,
        /// Weight on the laplacian MSE term (needs derivative targets).
        #[arg(long)]
        laplacian_weight: Option<f64>,
        /// Measurement operator as inline JSON, e.g.
        /// {"op":"mask","keep_ratio":0.25,"seed":0}.
        #[arg(long)]
        operator: Option<String>,
        /// L2 penalty weight on all trainable parameters.
        #[arg(long)]
        weight_decay: Option<f64>,
        /// Total-variation penalty weight on the evaluation grid.
        #[arg(long)]
        tv: Option<f64>,
    },
    /// Resample a saved model on a grid or at explicit coordinates.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        /// Model file written by fit/mire-select/meta-fit.
        model: Option<String>,
        /// Output grid width in pixels.
        #[arg(long)]
        width: Option<usize>,
        /// Output grid height in pixels.
        #[arg(long)]
        height: Option<usize>,
        /// Headerless CSV of coordinates, one row per point.
        #[arg(long)]
        coords: Option<String>,
    },
    /// Coarse-to-fine fitting with one net per active pyramid patch.
    PyramidFit {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long)]
        image: Option<String>,
        /// Pyramid levels.
        #[arg(long)]
        levels: Option<usize>,
        /// Patch edge length in pixels.
        #[arg(long)]
        patch: Option<usize>,
        /// Residual-energy fraction below which a patch is pruned.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
    },
    /// Greedy per-layer atom selection from a dictionary.
    MireSelect {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long)]
        image: Option<String>,
        #[arg(long)]
        audio: Option<String>,
        /// Comma-separated candidate atom names, e.g. relu,sine,gaussian.
        #[arg(long)]
        dictionary: Option<String>,
        /// Steps per candidate trial.
        #[arg(long)]
        trial_steps: Option<usize>,
        /// Steps for the final fit.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        batch: Option<usize>,
    },
    /// Pick an atom frequency by spectrum match at initialization.
    FreshSelect {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long)]
        image: Option<String>,
        #[arg(long)]
        audio: Option<String>,
        /// Candidate frequencies, e.g. 5,10,20,30.
        #[arg(long)]
        w0_list: Option<String>,
    },
    /// Learn an initialization over the shifted-bump task family.
    MetaFit {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        arch: ArchArgs,
        /// Gradient steps per task adaptation.
        #[arg(long)]
        inner_steps: Option<usize>,
        /// Adaptation learning rate.
        #[arg(long)]
        inner_lr: Option<f64>,
        /// Meta (outer) learning rate.
        #[arg(long)]
        outer_lr: Option<f64>,
        /// Outer optimization steps.
        #[arg(long)]
        outer_steps: Option<usize>,
        /// Tasks sampled per outer step.
        #[arg(long)]
        tasks_per_batch: Option<usize>,
        /// Bump width of the task family.
        #[arg(long)]
        bump_sigma: Option<f64>,
        /// Samples per task.
        #[arg(long)]
        bump_n: Option<usize>,
    },
    /// Frame bounds and translate classification for one atom.
    AnalyzeRiesz {
        #[command(flatten)]
        common: CommonArgs,
        /// Atom name from the catalog.
        #[arg(long)]
        atom: Option<String>,
        /// Frequency override where the atom has one.
        #[arg(long)]
        w0: Option<f64>,
        /// Width/decay override for gaussian and wire.
        #[arg(long)]
        s: Option<f64>,
        /// hosc gain override.
        #[arg(long)]
        beta: Option<f64>,
        /// Autocorrelation lags entering the frame bounds.
        #[arg(long)]
        translates: Option<usize>,
        /// Half-width of the sampling window, in integer units.
        #[arg(long)]
        window: Option<usize>,
        /// Samples per unit length.
        #[arg(long)]
        density: Option<usize>,
    },
    /// Two-tone training probe: which band does the network learn first?
    ProbeSpectralBias {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        arch: ArchArgs,
        /// Low tone, cycles over the sampled interval.
        #[arg(long)]
        f_lo: Option<usize>,
        /// High tone, cycles over the sampled interval.
        #[arg(long)]
        f_hi: Option<usize>,
        /// Sample count.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        amp_lo: Option<f64>,
        #[arg(long)]
        amp_hi: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Residual measurement cadence in steps.
        #[arg(long)]
        checkpoint_every: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
    },
    /// Spectral support of a polynomial driven by a pure tone.
    ProbeHarmonics {
        #[command(flatten)]
        common: CommonArgs,
        /// Polynomial coefficients a_1..a_K, comma-separated.
        #[arg(long)]
        alpha: Option<String>,
        /// Tone frequency in cycles.
        #[arg(long)]
        omega: Option<usize>,
        /// DFT length (power of two; chosen automatically when absent).
        #[arg(long)]
        n: Option<usize>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn init_threads() -> CliResult<()> {
    match std::env::var("INRF_THREADS") {
        Err(_) => Ok(()),
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| {
                CliError::Config(format!("INRF_THREADS: '{v}' is not a thread count"))
            })?;
            if n == 0 {
                return Err(CliError::Config("INRF_THREADS must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(format!("INRF_THREADS: {e}")))
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    init_threads()?;
    let (task, common, flags) = collect(cli.cmd)?;
    let cfg = flags.resolve(common.config.as_deref(), task)?;
    if common.dump_config {
        print!("{}", cfg.dump());
        return Ok(());
    }
    match task {
        "fit" => commands::fit::run(&cfg),
        "eval" => commands::eval::run(&cfg),
        "pyramid-fit" => commands::pyramid::run(&cfg),
        "mire-select" => commands::mire::run(&cfg),
        "fresh-select" => commands::fresh::run(&cfg),
        "meta-fit" => commands::meta::run(&cfg),
        "analyze-riesz" => commands::riesz::run(&cfg),
        "probe-spectral-bias" => commands::bias::run(&cfg),
        "probe-harmonics" => commands::harmonics::run(&cfg),
        _ => unreachable!("subcommand names are fixed above"),
    }
}

/// Lower the parsed subcommand to (task name, common flags, config overlay).
fn collect(cmd: Cmd) -> CliResult<(&'static str, CommonArgs, RunConfig)> {
    let mut cfg = RunConfig::default();
    let (task, common) = match cmd {
        Cmd::Fit {
            common,
            arch,
            image,
            audio,
            steps,
            lr,
            batch,
            value_weight,
            jacobian_weight,
            laplacian_weight,
            operator,
            weight_decay,
            tv,
        } => {
            arch.fill(&mut cfg);
            cfg.image = image;
            cfg.audio = audio;
            cfg.steps = steps;
            cfg.lr = lr;
            cfg.batch = batch;
            cfg.value_weight = value_weight;
            cfg.jacobian_weight = jacobian_weight;
            cfg.laplacian_weight = laplacian_weight;
            cfg.operator = match operator.as_deref() {
                Some(text) => Some(assemble::operator_json(text)?),
                None => None,
            };
            cfg.weight_decay = weight_decay;
            cfg.tv = tv;
            ("fit", common)
        }
        Cmd::Eval { common, model, width, height, coords } => {
            cfg.model = model;
            cfg.width = width;
            cfg.height = height;
            cfg.coords = coords;
            ("eval", common)
        }
        Cmd::PyramidFit { common, arch, image, levels, patch, tau, steps, lr } => {
            arch.fill(&mut cfg);
            cfg.image = image;
            cfg.levels = levels;
            cfg.patch = patch;
            cfg.tau = tau;
            cfg.steps = steps;
            cfg.lr = lr;
            ("pyramid-fit", common)
        }
        Cmd::MireSelect {
            common,
            arch,
            image,
            audio,
            dictionary,
            trial_steps,
            steps,
            lr,
            batch,
        } => {
            arch.fill(&mut cfg);
            cfg.image = image;
            cfg.audio = audio;
            cfg.dictionary = dictionary;
            cfg.trial_steps = trial_steps;
            cfg.steps = steps;
            cfg.lr = lr;
            cfg.batch = batch;
            ("mire-select", common)
        }
        Cmd::FreshSelect { common, arch, image, audio, w0_list } => {
            arch.fill(&mut cfg);
            cfg.image = image;
            cfg.audio = audio;
            cfg.w0_list = w0_list;
            ("fresh-select", common)
        }
        Cmd::MetaFit {
            common,
            arch,
            inner_steps,
            inner_lr,
            outer_lr,
            outer_steps,
            tasks_per_batch,
            bump_sigma,
            bump_n,
        } => {
            arch.fill(&mut cfg);
            cfg.inner_steps = inner_steps;
            cfg.inner_lr = inner_lr;
            cfg.outer_lr = outer_lr;
            cfg.outer_steps = outer_steps;
            cfg.tasks_per_batch = tasks_per_batch;
            cfg.bump_sigma = bump_sigma;
            cfg.bump_n = bump_n;
            ("meta-fit", common)
        }
        Cmd::AnalyzeRiesz { common, atom, w0, s, beta, translates, window, density } => {
            cfg.atom = atom;
            cfg.w0 = w0;
            cfg.s = s;
            cfg.beta = beta;
            cfg.translates = translates;
            cfg.window = window;
            cfg.density = density;
            ("analyze-riesz", common)
        }
        Cmd::ProbeSpectralBias {
            common,
            arch,
            f_lo,
            f_hi,
            n,
            amp_lo,
            amp_hi,
            steps,
            checkpoint_every,
            lr,
        } => {
            arch.fill(&mut cfg);
            cfg.f_lo = f_lo;
            cfg.f_hi = f_hi;
            cfg.n = n;
            cfg.amp_lo = amp_lo;
            cfg.amp_hi = amp_hi;
            cfg.steps = steps;
            cfg.checkpoint_every = checkpoint_every;
            cfg.lr = lr;
            ("probe-spectral-bias", common)
        }
        Cmd::ProbeHarmonics { common, alpha, omega, n } => {
            cfg.alpha = alpha;
            cfg.omega = omega;
            cfg.n = n;
            ("probe-harmonics", common)
        }
    };
    cfg.out_dir = common.out_dir.clone();
    cfg.seed = common.seed;
    Ok((task, common, cfg))
}
