//! Training: Adam fitting, factorized-weight training, greedy activation
//! selection, meta-initialization, and coarse-to-fine pyramid fitting.

pub mod adam;
pub mod fit;
pub mod meta;
pub mod miner;
pub mod mire;
pub mod reparam;

pub use adam::Adam;
pub use fit::{fit, FitConfig, TrainLog};
pub use meta::{adapt, gaussian_bump_task, meta_fit, MetaConfig};
pub use miner::{miner_fit, MinerConfig, MinerModel};
pub use mire::{mire_select, MireConfig, MireOutcome};
pub use reparam::{fit_reparam, ReparamLayer};
