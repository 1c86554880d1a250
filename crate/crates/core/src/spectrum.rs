//! Discrete Fourier analysis and spectrum-matched configuration selection.
//!
//! `dft` is the unnormalized forward transform — an iterative radix-2 FFT
//! when the length is a power of two, a direct O(n^2) evaluation otherwise.
//! Both routes are exact transforms of each other and are cross-checked in
//! tests, along with Parseval's identity and the inverse transform.
//!
//! A [`SpectrumSummary`] is the normalized magnitude profile of a real
//! signal: half-spectrum bins (length n/2 + 1) for 1D, radial-bin averages
//! of the 2D transform for images (bin-unit radius, intended for square or
//! near-square grids), scaled to sum to one. Profiles are compared with the
//! 1-Wasserstein distance — the L1 distance between cumulative sums, in
//! bin units.
//!
//! [`fresh_select`] picks, from a list of candidate architectures, the one
//! whose freshly initialized output spectrum is W1-closest to the target
//! signal's spectrum. Each candidate initializes from the RNG substream
//! `seed ^ candidate_index`, and evaluates on the target's own grid; one
//! draw per candidate. Ties break toward the earlier candidate.

use crate::error::{Error, Result};
use crate::init::{build_field, InitScheme};
use crate::matrix::Matrix;
use crate::model::FieldSpec;
use crate::objective::SampledSignal;
use crate::rng::Rng;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::TAU;

/// In-place radix-2 Cooley-Tukey; `len` must be a power of two.
fn fft_pow2(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * TAU / len as f64;
        let wl = Complex64::new(ang.cos(), ang.sin());
        for start in (0..n).step_by(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[start + k];
                let v = buf[start + k + len / 2] * w;
                buf[start + k] = u + v;
                buf[start + k + len / 2] = u - v;
                w *= wl;
            }
        }
        len <<= 1;
    }
}

/// Direct transform; angles are reduced modulo n before the trig call so
/// precision does not degrade with k*t.
fn dft_direct(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = x.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let ang = sign * TAU * ((k * t) % n) as f64 / n as f64;
                acc += v * Complex64::new(ang.cos(), ang.sin());
            }
            acc
        })
        .collect()
}

/// Unnormalized forward transform of complex samples.
pub fn dft_complex(x: &[Complex64]) -> Vec<Complex64> {
    assert!(!x.is_empty(), "dft of empty signal");
    if x.len().is_power_of_two() {
        let mut buf = x.to_vec();
        fft_pow2(&mut buf, false);
        buf
    } else {
        dft_direct(x, false)
    }
}

/// Unnormalized forward transform of real samples.
pub fn dft(x: &[f64]) -> Vec<Complex64> {
    let cx: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft_complex(&cx)
}

/// Inverse transform (includes the 1/n factor).
pub fn idft(x: &[Complex64]) -> Vec<Complex64> {
    assert!(!x.is_empty(), "idft of empty spectrum");
    let n = x.len() as f64;
    let mut out = if x.len().is_power_of_two() {
        let mut buf = x.to_vec();
        fft_pow2(&mut buf, true);
        buf
    } else {
        dft_direct(x, true)
    };
    for v in &mut out {
        *v /= n;
    }
    out
}

/// 2D forward transform of row-major real data (w x h): rows then columns.
pub fn dft2(data: &[f64], width: usize, height: usize) -> Vec<Complex64> {
    assert_eq!(data.len(), width * height);
    let mut grid: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for y in 0..height {
        let row = dft_complex(&grid[y * width..(y + 1) * width]);
        grid[y * width..(y + 1) * width].copy_from_slice(&row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); height];
    for x in 0..width {
        for y in 0..height {
            col[y] = grid[y * width + x];
        }
        let t = dft_complex(&col);
        for y in 0..height {
            grid[y * width + x] = t[y];
        }
    }
    grid
}

/// Normalized magnitude profile of a real signal; bins sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSummary {
    bins: Vec<f64>,
}

impl SpectrumSummary {
    pub fn from_bins(bins: Vec<f64>) -> Result<SpectrumSummary> {
        if bins.is_empty() || bins.iter().any(|&b| !(b >= 0.0) || !b.is_finite()) {
            return Err(Error::InvalidParam(
                "spectrum bins must be non-negative and finite".into(),
            ));
        }
        let sum: f64 = bins.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParam(format!(
                "spectrum bins must sum to 1, got {sum}"
            )));
        }
        Ok(SpectrumSummary { bins })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    fn normalize(mut raw: Vec<f64>) -> Result<SpectrumSummary> {
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::NonFinite {
                context: "zero-energy signal cannot be normalized into a spectrum".into(),
            });
        }
        for b in &mut raw {
            *b /= total;
        }
        Ok(SpectrumSummary { bins: raw })
    }
}

/// Half-spectrum magnitude profile of a real 1D signal, length n/2 + 1.
pub fn spectrum_summary(samples: &[f64]) -> Result<SpectrumSummary> {
    if samples.len() < 2 {
        return Err(Error::InvalidParam("spectrum needs at least 2 samples".into()));
    }
    let spec = dft(samples);
    let raw: Vec<f64> = (0..=samples.len() / 2).map(|k| spec[k].norm()).collect();
    SpectrumSummary::normalize(raw)
}

/// Radially binned magnitude profile of a real 2D signal: per-frequency
/// magnitudes averaged over annuli of bin-unit radius, min(w,h)/2 + 1 bins.
pub fn spectrum_summary_2d(data: &[f64], width: usize, height: usize) -> Result<SpectrumSummary> {
    if width < 2 || height < 2 {
        return Err(Error::InvalidParam("2d spectrum needs at least 2x2 samples".into()));
    }
    let spec = dft2(data, width, height);
    let nbins = width.min(height) / 2 + 1;
    let mut sums = vec![0.0f64; nbins];
    let mut counts = vec![0usize; nbins];
    for ky in 0..height {
        for kx in 0..width {
            let fx = kx.min(width - kx) as f64;
            let fy = ky.min(height - ky) as f64;
            let b = (fx * fx + fy * fy).sqrt().round() as usize;
            if b < nbins {
                sums[b] += spec[ky * width + kx].norm();
                counts[b] += 1;
            }
        }
    }
    let raw: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    SpectrumSummary::normalize(raw)
}

/// 1-Wasserstein distance between two profiles with equal bin counts:
/// the L1 distance between their cumulative sums, in bin units.
pub fn wasserstein1(a: &SpectrumSummary, b: &SpectrumSummary) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Incompatible(format!(
            "profiles have {} vs {} bins",
            a.len(),
            b.len()
        )));
    }
    let mut ca = 0.0;
    let mut cb = 0.0;
    let mut dist = 0.0;
    for (x, y) in a.bins.iter().zip(&b.bins) {
        ca += x;
        cb += y;
        dist += (ca - cb).abs();
    }
    Ok(dist)
}

pub use crate::signal::sample::GridShape;

/// Spectrum of gridded values (n x c); per-channel profiles are summed
/// before normalizing, so channels contribute by energy.
pub fn grid_spectrum(ys: &Matrix<f64>, grid: GridShape) -> Result<SpectrumSummary> {
    if ys.rows() != grid.len() {
        return Err(Error::Incompatible(format!(
            "{} samples vs grid of {}",
            ys.rows(),
            grid.len()
        )));
    }
    let mut acc: Option<Vec<f64>> = None;
    for c in 0..ys.cols() {
        let chan: Vec<f64> = (0..ys.rows()).map(|i| ys[(i, c)]).collect();
        let raw = match grid {
            GridShape::One(n) => {
                let spec = dft(&chan);
                (0..=n / 2).map(|k| spec[k].norm()).collect::<Vec<f64>>()
            }
            GridShape::Two(w, h) => {
                let spec = dft2(&chan, w, h);
                let nbins = w.min(h) / 2 + 1;
                let mut sums = vec![0.0f64; nbins];
                let mut counts = vec![0usize; nbins];
                for ky in 0..h {
                    for kx in 0..w {
                        let fx = kx.min(w - kx) as f64;
                        let fy = ky.min(h - ky) as f64;
                        let b = (fx * fx + fy * fy).sqrt().round() as usize;
                        if b < nbins {
                            sums[b] += spec[ky * w + kx].norm();
                            counts[b] += 1;
                        }
                    }
                }
                sums.iter()
                    .zip(&counts)
                    .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
                    .collect()
            }
        };
        match &mut acc {
            None => acc = Some(raw),
            Some(a) => {
                for (x, y) in a.iter_mut().zip(&raw) {
                    *x += *y;
                }
            }
        }
    }
    SpectrumSummary::normalize(acc.expect("at least one channel"))
}

#[derive(Clone, Debug)]
pub struct FreshCandidate {
    pub spec: FieldSpec,
    pub scheme: InitScheme,
}

#[derive(Clone, Debug)]
pub struct FreshOutcome {
    pub selected: usize,
    pub distances: Vec<f64>,
}

/// Pick the candidate whose freshly initialized output spectrum is closest
/// to the target's. Candidate `i` draws from `Rng::substream(seed, i)`;
/// evaluation uses the target's own coordinates, so the comparison is
/// grid-exact. Ties break toward the earlier candidate.
pub fn fresh_select(
    candidates: &[FreshCandidate],
    target: &SampledSignal<f64>,
    grid: GridShape,
    seed: u64,
) -> Result<FreshOutcome> {
    if candidates.is_empty() {
        return Err(Error::InvalidParam("fresh selection needs at least one candidate".into()));
    }
    if target.len() < 64 {
        return Err(Error::InvalidParam(format!(
            "fresh selection needs >= 64 grid samples, got {}",
            target.len()
        )));
    }
    if grid.len() != target.len() {
        return Err(Error::Incompatible(format!(
            "grid of {} vs {} samples",
            grid.len(),
            target.len()
        )));
    }
    let target_spectrum = grid_spectrum(&target.ys, grid)?;
    let distances: Vec<f64> = candidates
        .par_iter()
        .enumerate()
        .map(|(i, cand)| -> Result<f64> {
            let mut rng = Rng::substream(seed, i as u64);
            let field = build_field::<f64>(&cand.spec, &cand.scheme, &mut rng)?;
            let out = field.forward_batch(&target.xs);
            let summary = grid_spectrum(&out, grid)?;
            wasserstein1(&summary, &target_spectrum)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut selected = 0;
    for (i, &d) in distances.iter().enumerate() {
        if d < distances[selected] {
            selected = i;
        }
    }
    Ok(FreshOutcome { selected, distances })
}
