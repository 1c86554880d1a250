//! Run configuration: a flat JSON document whose keys mirror the CLI
//! flags. A config file supplies defaults, explicit flags override it,
//! and `--dump-config` prints the merged result so any run can be
//! reproduced from the dumped file alone.

use crate::errors::{io_at, CliError, CliResult};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Measurement operator description, embeddable in the config file or
/// passed inline as JSON via `--operator`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorCfg {
    Identity,
    /// Random subsampling: each grid sample is kept with probability
    /// `keep_ratio`, drawn from `seed`.
    Mask { keep_ratio: f64, seed: u64 },
    /// Odd-length convolution kernel, zero padding.
    Conv { kernel: Vec<f64> },
    /// Block mean pooling by an integer factor per axis.
    Downsample { factor: usize },
}

macro_rules! run_config {
    ($($field:ident: $ty:ty),* $(,)?) => {
        #[derive(Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
        #[serde(deny_unknown_fields, default)]
        pub struct RunConfig {
            $(
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl RunConfig {
            /// Field-wise merge; `self` (the flags) wins where set.
            pub fn over(self, base: RunConfig) -> RunConfig {
                RunConfig { $($field: self.$field.or(base.$field)),* }
            }
        }
    };
}

run_config! {
    task: String,
    image: String,
    audio: String,
    model: String,
    coords: String,
    out_dir: String,
    seed: u64,
    encoding: String,
    ff_m: usize,
    ff_sigma: f64,
    ff_octaves: usize,
    ff_trainable: bool,
    hash_levels: usize,
    hash_n0: u32,
    hash_growth: f64,
    hash_table_size: usize,
    hash_features: usize,
    atom: String,
    atoms: String,
    w0: f64,
    s: f64,
    beta: f64,
    layer_width: usize,
    depth: usize,
    scheme: String,
    finer_k: f64,
    steps: usize,
    lr: f64,
    batch: usize,
    value_weight: f64,
    jacobian_weight: f64,
    laplacian_weight: f64,
    operator: OperatorCfg,
    weight_decay: f64,
    tv: f64,
    width: usize,
    height: usize,
    levels: usize,
    patch: usize,
    tau: f64,
    dictionary: String,
    trial_steps: usize,
    w0_list: String,
    inner_steps: usize,
    inner_lr: f64,
    outer_lr: f64,
    outer_steps: usize,
    tasks_per_batch: usize,
    bump_sigma: f64,
    bump_n: usize,
    translates: usize,
    window: usize,
    density: usize,
    f_lo: usize,
    f_hi: usize,
    n: usize,
    amp_lo: f64,
    amp_hi: f64,
    checkpoint_every: usize,
    alpha: String,
    omega: usize,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| io_at(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    /// Merge a config file (when given) under the flag values and pin the
    /// task name, rejecting a file written for a different command.
    pub fn resolve(self, file: Option<&Path>, task: &str) -> CliResult<RunConfig> {
        let base = match file {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(t) = base.task.as_deref() {
            if t != task {
                return Err(CliError::Config(format!(
                    "config is for task '{t}', but the current command is '{task}'"
                )));
            }
        }
        let mut merged = self.over(base);
        merged.task = Some(task.to_string());
        Ok(merged)
    }

    pub fn dump(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        text
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.out_dir.as_deref().unwrap_or("."))
    }
}
