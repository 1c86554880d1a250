//! Activation atoms: the pointwise nonlinearities a network layer can use,
//! each with closed-form value, first, and second derivative.
//!
//! Atoms are the unit of spectral design. A layer applies its atom to
//! `omega * (W h + b)`, so every atom here is written for a plain scalar
//! argument; frequency scaling lives in the layer. The catalog order is
//! stable and doubles as the atom id in model files and as the tie-break
//! order in greedy selection.
//!
//! Derivative availability is gated by the smoothness flag: `C0` atoms
//! (relu) support value only, `C1` atoms (finer, whose second derivative
//! jumps at the origin) support first derivatives, and `CInf` atoms support
//! everything. The second-derivative component returned by [`Atom::eval`]
//! is always filled in, using the a.e. value with `sign(0) = 0` where a
//! kink exists; the gate is enforced where network derivative paths are
//! assembled, not here.

use crate::analytic::Analytic;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Smoothness {
    C0,
    C1,
    CInf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Neither,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Atom {
    Relu,
    /// `sin(omega x)`
    Sine { omega: f64 },
    /// `exp(-s x^2)`
    Gaussian { s: f64 },
    /// Real Gabor wavelet `exp(-s x^2) cos(omega x)`
    Wire { omega: f64, s: f64 },
    /// Variable-period sine `sin(omega (|x| + 1) x)`
    Finer { omega: f64 },
    /// `tanh(beta sin(omega x))`
    Hosc { beta: f64, omega: f64 },
    /// Cardinal sine `sin(omega x) / (omega x)`, 1 at the origin
    Sinc { omega: f64 },
    /// Raised cosine `sinc(omega1 x) cos(omega2 x) / (1 - s x^2)`.
    /// The denominator's zeros at `x = +-1/sqrt(s)` must be cancelled by
    /// zeros of the cosine, which pins `omega2 / sqrt(s)` to an odd
    /// multiple of pi/2; construction validates that.
    Rc { omega1: f64, omega2: f64, s: f64 },
    /// `sum_k a_k T_k(tanh(x))` with Chebyshev polynomials `T_k`
    Chebyshev { coeffs: Vec<f64> },
}

impl Atom {
    pub fn name(&self) -> &'static str {
        match self {
            Atom::Relu => "relu",
            Atom::Sine { .. } => "sine",
            Atom::Gaussian { .. } => "gaussian",
            Atom::Wire { .. } => "wire",
            Atom::Finer { .. } => "finer",
            Atom::Hosc { .. } => "hosc",
            Atom::Sinc { .. } => "sinc",
            Atom::Rc { .. } => "rc",
            Atom::Chebyshev { .. } => "chebyshev",
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        match self {
            Atom::Relu => Smoothness::C0,
            Atom::Finer { .. } => Smoothness::C1,
            _ => Smoothness::CInf,
        }
    }

    pub fn parity(&self) -> Parity {
        match self {
            Atom::Relu | Atom::Chebyshev { .. } => Parity::Neither,
            Atom::Sine { .. } | Atom::Finer { .. } | Atom::Hosc { .. } => Parity::Odd,
            Atom::Gaussian { .. } | Atom::Wire { .. } | Atom::Sinc { .. } | Atom::Rc { .. } => {
                Parity::Even
            }
        }
    }

    /// Position of `self` in [`catalog`] order; also the on-disk atom id.
    pub fn id(&self) -> u8 {
        match self {
            Atom::Relu => 0,
            Atom::Sine { .. } => 1,
            Atom::Gaussian { .. } => 2,
            Atom::Wire { .. } => 3,
            Atom::Finer { .. } => 4,
            Atom::Hosc { .. } => 5,
            Atom::Sinc { .. } => 6,
            Atom::Rc { .. } => 7,
            Atom::Chebyshev { .. } => 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParam(format!(
                    "{} requires {what} > 0, got {v}",
                    self.name()
                )))
            }
        };
        match self {
            Atom::Relu => Ok(()),
            Atom::Sine { omega } | Atom::Finer { omega } | Atom::Sinc { omega } => {
                positive(*omega, "omega")
            }
            Atom::Gaussian { s } => positive(*s, "s"),
            Atom::Wire { omega, s } => {
                positive(*omega, "omega")?;
                positive(*s, "s")
            }
            Atom::Hosc { beta, omega } => {
                positive(*beta, "beta")?;
                positive(*omega, "omega")
            }
            Atom::Rc { omega1, omega2, s } => {
                positive(*omega1, "omega1")?;
                positive(*omega2, "omega2")?;
                positive(*s, "s")?;
                // Removability: cos(omega2 x) must vanish at x = 1/sqrt(s).
                let ratio = omega2 / s.sqrt();
                let half_pi = std::f64::consts::FRAC_PI_2;
                let k = ((ratio - half_pi) / std::f64::consts::PI).round();
                let nearest = half_pi + k * std::f64::consts::PI;
                if k < 0.0 || (ratio - nearest).abs() > 1e-9 * ratio.max(1.0) {
                    return Err(Error::InvalidParam(format!(
                        "rc pole at 1/sqrt(s) is not removable: omega2/sqrt(s) = {ratio} \
                         must be an odd multiple of pi/2"
                    )));
                }
                Ok(())
            }
            Atom::Chebyshev { coeffs } => {
                if coeffs.is_empty() {
                    Err(Error::InvalidParam("chebyshev needs at least one coefficient".into()))
                } else if coeffs.iter().any(|c| !c.is_finite()) {
                    Err(Error::InvalidParam("chebyshev coefficients must be finite".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Value only; cheaper than [`Atom::eval`] on the forward-only path.
    pub fn value<T: Analytic>(&self, x: T) -> T {
        match self {
            Atom::Relu => x.relu(),
            Atom::Sine { omega } => (x * x.konst(*omega)).sin(),
            Atom::Gaussian { s } => (-(x.sq() * x.konst(*s))).exp(),
            Atom::Wire { omega, s } => {
                (-(x.sq() * x.konst(*s))).exp() * (x * x.konst(*omega)).cos()
            }
            Atom::Finer { omega } => {
                let u = x.konst(*omega) * (x.abs() + x.konst(1.0)) * x;
                u.sin()
            }
            Atom::Hosc { beta, omega } => ((x * x.konst(*omega)).sin() * x.konst(*beta)).tanh(),
            Atom::Sinc { omega } => sinc_parts(x * x.konst(*omega)).0,
            Atom::Rc { .. } => self.eval(x).0,
            Atom::Chebyshev { coeffs } => {
                let t = x.tanh();
                chebyshev_parts(coeffs, t).0
            }
        }
    }

    /// Value and first derivative; what the traced training forward pass
    /// needs per unit.
    pub fn value_d1<T: Analytic>(&self, x: T) -> (T, T) {
        let (v, d1, _) = self.eval(x);
        (v, d1)
    }

    /// `(psi, psi', psi'')` at `x`.
    pub fn eval<T: Analytic>(&self, x: T) -> (T, T, T) {
        match self {
            Atom::Relu => {
                let zero = x.konst(0.0);
                if x.primal() > 0.0 {
                    (x, x.konst(1.0), zero)
                } else {
                    (zero, zero, zero)
                }
            }
            Atom::Sine { omega } => {
                let w = x.konst(*omega);
                let u = x * w;
                let (s, c) = (u.sin(), u.cos());
                (s, w * c, -(w * w) * s)
            }
            Atom::Gaussian { s } => {
                let sv = x.konst(*s);
                let g = (-(x.sq() * sv)).exp();
                let two_s = x.konst(2.0 * *s);
                let d1 = -(two_s * x) * g;
                let d2 = (x.konst(4.0 * s * s) * x.sq() - two_s) * g;
                (g, d1, d2)
            }
            Atom::Wire { omega, s } => {
                let (wv, sv) = (x.konst(*omega), x.konst(*s));
                let e = (-(x.sq() * sv)).exp();
                let u = x * wv;
                let (si, co) = (u.sin(), u.cos());
                let two_s_x = x.konst(2.0 * *s) * x;
                let v = e * co;
                let d1 = -e * (two_s_x * co + wv * si);
                let d2 = e
                    * ((x.konst(4.0 * s * s) * x.sq() - x.konst(2.0 * *s) - wv * wv) * co
                        + x.konst(4.0 * s * omega) * x * si);
                (v, d1, d2)
            }
            Atom::Finer { omega } => {
                let w = x.konst(*omega);
                let ax = x.abs();
                let u = w * (ax + x.konst(1.0)) * x;
                let (si, co) = (u.sin(), u.cos());
                // d/dx [(|x|+1) x] = 2|x| + 1; d2/dx2 = 2 sign(x), sign(0) = 0.
                let du = w * (x.konst(2.0) * ax + x.konst(1.0));
                let sgn = if x.primal() > 0.0 {
                    1.0
                } else if x.primal() < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                let ddu = x.konst(2.0 * omega * sgn);
                (si, du * co, ddu * co - du.sq() * si)
            }
            Atom::Hosc { beta, omega } => {
                let (bv, wv) = (x.konst(*beta), x.konst(*omega));
                let u = x * wv;
                let (si, co) = (u.sin(), u.cos());
                let t = (bv * si).tanh();
                let sech2 = x.konst(1.0) - t.sq();
                let d1 = sech2 * bv * wv * co;
                let d2 = sech2
                    * (-(x.konst(2.0) * t) * (bv * wv * co).sq() - bv * wv * wv * si);
                (t, d1, d2)
            }
            Atom::Sinc { omega } => {
                let w = x.konst(*omega);
                let (v, d1, d2) = sinc_parts(x * w);
                (v, w * d1, w * w * d2)
            }
            Atom::Rc { omega1, omega2, s } => {
                let w1 = x.konst(*omega1);
                let (sv, s1v, s2v) = sinc_parts(x * w1);
                let (sv1, sv2) = (w1 * s1v, w1 * w1 * s2v);
                let (r, r1, r2) = rc_ratio_parts(x, *omega2, *s);
                let v = sv * r;
                let d1 = sv1 * r + sv * r1;
                let d2 = sv2 * r + x.konst(2.0) * sv1 * r1 + sv * r2;
                (v, d1, d2)
            }
            Atom::Chebyshev { coeffs } => {
                let t = x.tanh();
                let (p, pt, ptt) = chebyshev_parts(coeffs, t);
                let dt = x.konst(1.0) - t.sq(); // d tanh / dx
                let v = p;
                let d1 = pt * dt;
                let d2 = ptt * dt.sq() - x.konst(2.0) * t * dt * pt;
                (v, d1, d2)
            }
        }
    }
}

/// `sinc(u) = sin(u)/u` with its first two derivatives. Near the origin the
/// closed forms cancel catastrophically, so a truncated even series takes
/// over below |u| = 0.1, where its tail is under 1e-12.
fn sinc_parts<T: Analytic>(u: T) -> (T, T, T) {
    if u.primal().abs() < 0.1 {
        let u2 = u.sq();
        let v = u.konst(1.0)
            + u2 * (u.konst(-1.0 / 6.0)
                + u2 * (u.konst(1.0 / 120.0) + u2 * u.konst(-1.0 / 5040.0)));
        let d1 = u
            * (u.konst(-1.0 / 3.0)
                + u2 * (u.konst(1.0 / 30.0) + u2 * u.konst(-1.0 / 840.0)));
        let d2 = u.konst(-1.0 / 3.0)
            + u2 * (u.konst(1.0 / 10.0) + u2 * u.konst(-1.0 / 168.0));
        (v, d1, d2)
    } else {
        let (s, c) = (u.sin(), u.cos());
        let v = s / u;
        let d1 = (c - v) / u;
        let d2 = (-s - u.konst(2.0) * d1) / u;
        (v, d1, d2)
    }
}

/// `R(x) = cos(omega2 x) / (1 - s x^2)` with derivatives, switching to a
/// fifth-order series within 1e-4 of the removable poles at +-1/sqrt(s).
fn rc_ratio_parts<T: Analytic>(x: T, omega2: f64, s: f64) -> (T, T, T) {
    let x0 = 1.0 / s.sqrt();
    let xp = x.primal();
    let pole = if xp >= 0.0 { x0 } else { -x0 };
    if (xp.abs() - x0).abs() < 1e-4 {
        // Taylor coefficients of numerator and denominator about the pole.
        // cos(omega2 p) = 0 there, so both leading terms vanish and the
        // ratio is a polynomial in u = x - p.
        let sn = (omega2 * pole).sin();
        let nmr = [
            0.0,
            -omega2 * sn,
            0.0,
            omega2.powi(3) * sn / 6.0,
            0.0,
            -omega2.powi(5) * sn / 120.0,
        ];
        let d1 = -2.0 * s * pole;
        let d2 = -s;
        // Divide the series (both sides share the factor u).
        let mut r = [0.0f64; 5];
        for m in 0..5 {
            let mut acc = nmr[m + 1];
            if m >= 1 {
                acc -= d2 * r[m - 1];
            }
            r[m] = acc / d1;
        }
        let u = x - x.konst(pole);
        let mut v = x.konst(r[4]);
        let mut dv = x.konst(4.0 * r[4]);
        let mut ddv = x.konst(12.0 * r[4]);
        for m in (0..4).rev() {
            v = v * u + x.konst(r[m]);
            if m >= 1 {
                dv = dv * u + x.konst(m as f64 * r[m]);
            }
            if m >= 2 {
                ddv = ddv * u + x.konst((m * (m - 1)) as f64 * r[m]);
            }
        }
        (v, dv, ddv)
    } else {
        let w2 = x.konst(omega2);
        let u = x * w2;
        let c = u.cos();
        let c1 = -w2 * u.sin();
        let c2 = -(w2 * w2) * c;
        let n = x.konst(1.0) - x.konst(s) * x.sq();
        let n1 = x.konst(-2.0 * s) * x;
        let n2 = x.konst(-2.0 * s);
        let v = c / n;
        let d1 = c1 / n - c * n1 / n.sq();
        let d2 = c2 / n - x.konst(2.0) * c1 * n1 / n.sq() - c * n2 / n.sq()
            + x.konst(2.0) * c * n1.sq() / (n.sq() * n);
        (v, d1, d2)
    }
}

/// `sum a_k T_k(t)` with first and second derivatives with respect to `t`.
fn chebyshev_parts<T: Analytic>(coeffs: &[f64], t: T) -> (T, T, T) {
    let zero = t.konst(0.0);
    let mut p = t.konst(coeffs[0]);
    let mut pt = zero;
    let mut ptt = zero;
    if coeffs.len() == 1 {
        return (p, pt, ptt);
    }
    let two = t.konst(2.0);
    let (mut tk_prev, mut tk) = (t.konst(1.0), t); // T_{k-1}, T_k
    let (mut dk_prev, mut dk) = (zero, t.konst(1.0));
    let (mut sk_prev, mut sk) = (zero, zero);
    p = p + t.konst(coeffs[1]) * tk;
    pt = pt + t.konst(coeffs[1]) * dk;
    for &a in &coeffs[2..] {
        let tk_next = two * t * tk - tk_prev;
        let dk_next = two * tk + two * t * dk - dk_prev;
        let sk_next = t.konst(4.0) * dk + two * t * sk - sk_prev;
        tk_prev = tk;
        tk = tk_next;
        dk_prev = dk;
        dk = dk_next;
        sk_prev = sk;
        sk = sk_next;
        let av = t.konst(a);
        p = p + av * tk;
        pt = pt + av * dk;
        ptt = ptt + av * sk;
    }
    (p, pt, ptt)
}

/// Default-parameter instance of every atom, in id order.
pub fn catalog() -> Vec<Atom> {
    vec![
        Atom::Relu,
        Atom::Sine { omega: 30.0 },
        Atom::Gaussian { s: 1.0 },
        Atom::Wire { omega: 10.0, s: 1.0 },
        Atom::Finer { omega: 30.0 },
        Atom::Hosc { beta: 2.0, omega: 30.0 },
        Atom::Sinc { omega: std::f64::consts::PI },
        Atom::Rc {
            omega1: std::f64::consts::PI,
            omega2: std::f64::consts::FRAC_PI_2,
            s: 1.0,
        },
        Atom::Chebyshev { coeffs: vec![0.0, 1.0, 0.5, 0.25] },
    ]
}

/// Catalog entry by name, with default parameters.
pub fn by_name(name: &str) -> Option<Atom> {
    catalog().into_iter().find(|a| a.name() == name)
}
