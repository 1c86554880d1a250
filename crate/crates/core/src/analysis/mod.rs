//! Numerical verification of the toolbox's structural claims: harmonic
//! generation through polynomial activations, stability classification of
//! translate families, and frequency-ordered convergence probes.

pub mod bias;
pub mod harmonic;
pub mod riesz;

pub use bias::{
    spectral_bias_probe, steps_to_threshold, two_tone_target, BiasCurves, BiasProbeConfig,
};
pub use harmonic::{harmonic_probe, HarmonicProbe, HarmonicReport};
pub use riesz::{riesz_analyze, RieszClass, RieszReport};
