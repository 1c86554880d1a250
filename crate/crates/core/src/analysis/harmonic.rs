//! Spectral support of a polynomial applied to a complex exponential.
//!
//! Feeding γ(x) = e^{j2πωx} through ρ(z) = Σ_k α_k z^k produces
//! Σ_k α_k e^{j2πkωx}: energy exactly at the integer harmonics kω, with
//! magnitude |α_k|. The probe measures this numerically and reports which
//! DFT bins carry energy.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::dft_complex;

/// Relative magnitude below which a bin is considered empty.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct HarmonicProbe {
    /// Polynomial coefficients α_0..α_K applied to the exponential.
    pub alphas: Vec<f64>,
    /// Input frequency in cycles per unit.
    pub omega: usize,
    /// Sample count; a power of two so the transform is exact and fast.
    pub n: usize,
}

#[derive(Clone, Debug)]
pub struct HarmonicReport {
    /// Occupied bins as (cycles, magnitude), ascending in cycles. Magnitudes
    /// are DFT moduli divided by n, so a unit coefficient reads as 1.
    pub bins: Vec<(usize, f64)>,
}

/// Evaluate ρ(e^{j2πωx}) on n uniform samples of [0,1), transform, and
/// report every bin holding more than [`SUPPORT_THRESHOLD`] of the peak.
pub fn harmonic_probe(probe: &HarmonicProbe) -> Result<HarmonicReport> {
    let k = probe.alphas.len().saturating_sub(1);
    if k < 1 {
        return Err(Error::InvalidParam(
            "harmonic probe needs a polynomial of degree >= 1".into(),
        ));
    }
    if probe.omega == 0 {
        return Err(Error::InvalidParam("harmonic probe needs omega >= 1".into()));
    }
    if !probe.alphas.iter().all(|a| a.is_finite()) {
        return Err(Error::InvalidParam("polynomial coefficients must be finite".into()));
    }
    let n = probe.n;
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::InvalidParam(
            "harmonic probe needs a power-of-two sample count >= 8".into(),
        ));
    }
    let k_omega = (k * probe.omega) as u64;
    if k_omega >= (n / 2) as u64 {
        return Err(Error::Nyquist { k_omega, n });
    }

    let samples: Vec<Complex64> = (0..n)
        .map(|i| {
            let phase = std::f64::consts::TAU * probe.omega as f64 * i as f64 / n as f64;
            let z = Complex64::from_polar(1.0, phase);
            // Horner evaluation of ρ(z).
            probe
                .alphas
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
        })
        .collect();

    let spectrum = dft_complex(&samples);
    let mags: Vec<f64> = spectrum.iter().map(|c| c.norm() / n as f64).collect();
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(HarmonicReport { bins: Vec::new() });
    }

    let bins: Vec<(usize, f64)> = mags
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > SUPPORT_THRESHOLD * peak)
        .map(|(i, &m)| (i, m))
        .collect();
    for &(cycles, _) in &bins {
        assert!(
            cycles % probe.omega == 0 && cycles as u64 <= k_omega,
            "support leaked outside the harmonic set: bin {cycles}"
        );
    }
    Ok(HarmonicReport { bins })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_polynomial_peaks_at_omega() {
        let report = harmonic_probe(&HarmonicProbe {
            alphas: vec![0.0, 1.0],
            omega: 4,
            n: 64,
        })
        .unwrap();
        assert_eq!(report.bins.len(), 1);
        assert_eq!(report.bins[0].0, 4);
        assert!((report.bins[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_polynomial_doubles_the_frequency() {
        let report = harmonic_probe(&HarmonicProbe {
            alphas: vec![0.0, 0.0, 1.0],
            omega: 4,
            n: 64,
        })
        .unwrap();
        assert_eq!(report.bins.len(), 1);
        assert_eq!(report.bins[0].0, 8);
        assert!((report.bins[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_polynomial_reports_all_harmonics() {
        let alphas = vec![0.5, 1.0, 0.25, 0.1];
        let report = harmonic_probe(&HarmonicProbe {
            alphas: alphas.clone(),
            omega: 4,
            n: 128,
        })
        .unwrap();
        let cycles: Vec<usize> = report.bins.iter().map(|b| b.0).collect();
        assert_eq!(cycles, vec![0, 4, 8, 12]);
        for (bin, alpha) in report.bins.iter().zip(&alphas) {
            assert!((bin.1 - alpha.abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_coefficients_drop_their_harmonics() {
        let report = harmonic_probe(&HarmonicProbe {
            alphas: vec![0.0, 1.0, 0.0, -0.5],
            omega: 3,
            n: 128,
        })
        .unwrap();
        let cycles: Vec<usize> = report.bins.iter().map(|b| b.0).collect();
        assert_eq!(cycles, vec![3, 9]);
        assert!((report.bins[1].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn aliasing_is_rejected() {
        let err = harmonic_probe(&HarmonicProbe {
            alphas: vec![0.0, 0.0, 0.0, 1.0],
            omega: 4,
            n: 16,
        });
        match err {
            Err(Error::Nyquist { k_omega, n }) => {
                assert_eq!(k_omega, 12);
                assert_eq!(n, 16);
            }
            other => panic!("expected a Nyquist error, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_probes_are_rejected() {
        assert!(harmonic_probe(&HarmonicProbe { alphas: vec![1.0], omega: 4, n: 64 }).is_err());
        assert!(harmonic_probe(&HarmonicProbe { alphas: vec![0.0, 1.0], omega: 0, n: 64 }).is_err());
        assert!(harmonic_probe(&HarmonicProbe { alphas: vec![0.0, 1.0], omega: 4, n: 60 }).is_err());
    }
}
