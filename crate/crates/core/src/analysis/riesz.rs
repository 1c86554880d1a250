//! Stability analysis of the shift-invariant space spanned by integer
//! translates of an activation atom.
//!
//! The atom F is sampled on a window [-T, T]. Three quantities decide the
//! classification:
//!
//! - frame bounds A, B: extrema of G(ξ) = Σ_k |F̂(ξ+k)|². G is evaluated
//!   through the autocorrelation series G(ξ) = Σ_n a_n e^{-j2πnξ} with
//!   a_n = ∫ F(x)F(x-n) dx, which avoids windowing artifacts in F̂ for
//!   slowly decaying generators;
//! - pou_deviation: max_x |Σ_k F(x-k) - 1|, the distance from reproducing
//!   constants exactly (partition of unity);
//! - gram_min_singular: smallest singular value of the Gram matrix of the
//!   translates restricted to a common central subwindow, normalized so the
//!   largest diagonal entry is 1. Collinear translate families (a windowed
//!   fixed-frequency sine) are caught here.
//!
//! A generator classifies as `riesz` when the frame floor holds and the
//! translates reproduce unity, `weak_riesz` when only the frame floor
//! holds, and `fails` otherwise.

use crate::atom::Atom;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const DEFAULT_TRANSLATES: usize = 64;
pub const DEFAULT_WINDOW: usize = 32;
pub const DEFAULT_DENSITY: usize = 64;

/// Frame floor below which the translate family has no stable dual (εA).
pub const FRAME_MIN_THRESHOLD: f64 = 1e-3;
/// Partition-of-unity deviation separating riesz from weak_riesz (εP).
pub const POU_THRESHOLD: f64 = 1e-2;
/// Gram singular-value floor below which the family is degenerate (εG).
pub const GRAM_THRESHOLD: f64 = 1e-8;
/// Largest tolerable fraction of window energy in the outer 10% band.
pub const TRUNCATION_LIMIT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RieszClass {
    Riesz,
    WeakRiesz,
    Fails,
}

impl RieszClass {
    pub fn name(&self) -> &'static str {
        match self {
            RieszClass::Riesz => "riesz",
            RieszClass::WeakRiesz => "weak_riesz",
            RieszClass::Fails => "fails",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RieszReport {
    /// Lower frame bound A (clamped at 0).
    pub frame_min: f64,
    /// Upper frame bound B.
    pub frame_max: f64,
    /// max_x |Σ_k F(x-k) - 1|.
    pub pou_deviation: f64,
    /// Smallest singular value of the normalized translate Gram matrix.
    pub gram_min_singular: f64,
    pub classification: RieszClass,
}

/// Classify the integer translates of `atom` on the window [-window, window],
/// sampled at `density` points per unit. `k_translates` bounds the
/// autocorrelation lags entering the frame-bound series.
pub fn riesz_analyze(
    atom: &Atom,
    k_translates: usize,
    window: usize,
    density: usize,
) -> Result<RieszReport> {
    atom.validate()?;
    if k_translates == 0 {
        return Err(Error::InvalidParam("riesz analysis needs k_translates >= 1".into()));
    }
    if window < 4 {
        return Err(Error::InvalidParam("riesz analysis needs a window of at least 4 units".into()));
    }
    if density < 8 {
        return Err(Error::InvalidParam("riesz analysis needs density >= 8 samples per unit".into()));
    }

    let t = window;
    let q = density;
    let qf = q as f64;
    let n = 2 * t * q + 1;

    let f: Vec<f64> = (0..n)
        .map(|i| atom.value(-(t as f64) + i as f64 / qf))
        .collect();
    if !f.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { context: "generator samples".into() });
    }

    // Window truncation estimate: energy fraction in the outer 10% band.
    let edge = 0.9 * t as f64;
    let mut total = 0.0;
    let mut outer = 0.0;
    for (i, v) in f.iter().enumerate() {
        let x = -(t as f64) + i as f64 / qf;
        let e = v * v;
        total += e;
        if x.abs() >= edge {
            outer += e;
        }
    }
    if total <= 0.0 {
        return Err(Error::NonFinite { context: "generator window energy".into() });
    }
    let truncation = outer / total;

    // Autocorrelation lags and the common-subwindow Gram, both via one
    // prefix-sum pass per lag over the shared sample array.
    let lag_count = k_translates.min(2 * t - 1);
    let m = k_translates.min(t / 4);
    let size = 2 * m + 1;
    let mut lags = vec![0.0f64; lag_count + 1];
    let mut gram = Matrix::<f64>::zeros(size, size);
    let mut prefix = vec![0.0f64; n];
    for r in 0..=lag_count.max(2 * m) {
        let shift = r * q;
        let mut acc = 0.0;
        for u in shift..n {
            acc += f[u] * f[u - shift];
            prefix[u] = acc;
        }
        if r <= lag_count {
            lags[r] = acc / qf;
        }
        if r <= 2 * m {
            // Inner products of translates p and p+r over samples where
            // every |k| <= m translate stays inside the window.
            for p in -(m as i64)..=(m as i64 - r as i64) {
                let u_lo = ((m as i64 - p) * q as i64) as usize;
                let u_hi = n - 1 - ((m as i64 + p) * q as i64) as usize;
                let below = if u_lo > shift { prefix[u_lo - 1] } else { 0.0 };
                let v = (prefix[u_hi] - below) / qf;
                let gp = (p + m as i64) as usize;
                gram.row_mut(gp)[gp + r] = v;
                gram.row_mut(gp + r)[gp] = v;
            }
        }
    }

    // Frame bounds: extrema of the (real, even, 1-periodic) series over a
    // dense grid on [0, 1/2], endpoints included.
    let xi_steps = 8 * q;
    let mut frame_min = f64::INFINITY;
    let mut frame_max = f64::NEG_INFINITY;
    for mth in 0..=xi_steps {
        let xi = mth as f64 / (16.0 * qf);
        let mut g = lags[0];
        for (r, &a) in lags.iter().enumerate().skip(1) {
            g += 2.0 * a * (std::f64::consts::TAU * r as f64 * xi).cos();
        }
        frame_min = frame_min.min(g);
        frame_max = frame_max.max(g);
    }
    let frame_min = frame_min.max(0.0);

    // Partition-of-unity deviation over one period, translates added in
    // symmetric pairs so alternating tails cancel early.
    let mut pou_deviation = 0.0f64;
    for j in 0..q {
        let center = j + t * q;
        let mut s = f[center];
        for k in 1..=t {
            s += f[center - k * q];
            if center + k * q < n {
                s += f[center + k * q];
            }
        }
        pou_deviation = pou_deviation.max((s - 1.0).abs());
    }

    let scale = (0..size)
        .map(|i| gram.row(i)[i])
        .fold(0.0f64, f64::max);
    if !(scale > 0.0) {
        return Err(Error::NonFinite { context: "translate Gram diagonal".into() });
    }
    let inv = 1.0 / scale;
    for i in 0..size {
        for v in gram.row_mut(i) {
            *v *= inv;
        }
    }
    let gram_min_singular = gram
        .sym_eigenvalues()
        .iter()
        .map(|e| e.abs())
        .fold(f64::INFINITY, f64::min);

    let classification = if gram_min_singular < GRAM_THRESHOLD {
        RieszClass::Fails
    } else if truncation > TRUNCATION_LIMIT {
        return Err(Error::WindowTruncation { estimate: truncation, limit: TRUNCATION_LIMIT });
    } else if frame_min > FRAME_MIN_THRESHOLD && pou_deviation < POU_THRESHOLD {
        RieszClass::Riesz
    } else if frame_min > FRAME_MIN_THRESHOLD {
        RieszClass::WeakRiesz
    } else {
        RieszClass::Fails
    };

    Ok(RieszReport {
        frame_min,
        frame_max,
        pou_deviation,
        gram_min_singular,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_matches_closed_form_theory() {
        let report = riesz_analyze(&Atom::Gaussian { s: 1.0 }, 64, 32, 64).unwrap();

        // a_r = ∫ e^{-x²} e^{-(x-r)²} dx = sqrt(π/2) e^{-r²/2}; the series
        // extrema sit at ξ = 0 and ξ = 1/2.
        let a = |r: f64| (PI / 2.0).sqrt() * (-r * r / 2.0).exp();
        let mut expect_max = a(0.0);
        let mut expect_min = a(0.0);
        for r in 1..=12 {
            expect_max += 2.0 * a(r as f64);
            expect_min += 2.0 * a(r as f64) * if r % 2 == 0 { 1.0 } else { -1.0 };
        }
        assert!((report.frame_max - expect_max).abs() < 1e-9);
        assert!((report.frame_min - expect_min).abs() < 1e-9);

        // Σ_k e^{-(x-k)²} ≈ sqrt(π) up to 2e-4 ripple, so the unity gap is
        // essentially sqrt(π) - 1.
        assert!((report.pou_deviation - (PI.sqrt() - 1.0)).abs() < 1e-3);
        assert_eq!(report.classification, RieszClass::WeakRiesz);
        assert!(report.gram_min_singular > 1e-3);
    }

    #[test]
    fn sinc_is_a_riesz_generator() {
        let report = riesz_analyze(&Atom::Sinc { omega: PI }, 64, 32768, 64).unwrap();
        assert_eq!(report.classification, RieszClass::Riesz);
        assert!(report.frame_min > 0.99 && report.frame_max < 1.01);
        assert!(report.pou_deviation < 1e-2);
        assert!(report.gram_min_singular > 0.5);
    }

    #[test]
    fn windowed_sine_fails_by_rank_deficiency() {
        let report = riesz_analyze(&Atom::Sine { omega: PI }, 64, 32, 64).unwrap();
        assert_eq!(report.classification, RieszClass::Fails);
        assert!(report.gram_min_singular < GRAM_THRESHOLD);
    }

    #[test]
    fn growing_generator_reports_window_truncation() {
        let atom = Atom::Chebyshev { coeffs: vec![0.0, 1.0, 0.5, 0.25] };
        match riesz_analyze(&atom, 64, 32, 64) {
            Err(Error::WindowTruncation { estimate, limit }) => {
                assert!(estimate > limit);
                assert_eq!(limit, TRUNCATION_LIMIT);
            }
            other => panic!("expected a truncation error, got {other:?}"),
        }
    }

    #[test]
    fn classification_is_stable_under_density_doubling() {
        let cases: [(Atom, usize); 3] = [
            (Atom::Gaussian { s: 1.0 }, 32),
            (Atom::Sine { omega: PI }, 32),
            (Atom::Sinc { omega: PI }, 8192),
        ];
        for (atom, window) in &cases {
            let base = riesz_analyze(atom, 64, *window, 64).unwrap();
            let fine = riesz_analyze(atom, 64, *window, 128).unwrap();
            assert_eq!(base.classification, fine.classification, "{}", atom.name());
        }
    }

    #[test]
    fn report_invariants_hold() {
        for atom in [Atom::Gaussian { s: 1.0 }, Atom::Gaussian { s: 4.0 }, Atom::Sinc { omega: PI }] {
            let report = riesz_analyze(&atom, 32, 32, 64).unwrap();
            assert!(report.frame_min >= 0.0);
            assert!(report.frame_min <= report.frame_max);
            assert!(report.pou_deviation >= 0.0);
            assert!(report.gram_min_singular.is_finite());
        }
    }

    #[test]
    fn degenerate_requests_are_rejected() {
        let g = Atom::Gaussian { s: 1.0 };
        assert!(riesz_analyze(&g, 0, 32, 64).is_err());
        assert!(riesz_analyze(&g, 64, 2, 64).is_err());
        assert!(riesz_analyze(&g, 64, 32, 4).is_err());
    }
}
