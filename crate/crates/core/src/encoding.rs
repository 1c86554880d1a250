//! Input encodings: identity, Fourier features, and a multiresolution hash
//! grid.
//!
//! Fourier features map `x` to `[cos(2 pi B x); sin(2 pi B x)]` — all `m`
//! cosine rows first, then the `m` sine rows. That layout is part of the
//! model file format and must not change. `B` holds frequencies in cycles
//! per unit coordinate.
//!
//! The hash grid follows the multiresolution scheme with per-level tables:
//! level `l` has resolution `N_l = floor(n0 * growth^l)`; a level whose
//! vertex lattice fits in the table (`(N_l+1)^dim <= table_size`) indexes
//! vertices directly (row-major, axis 0 fastest) and is collision-free,
//! while finer levels fall back to the XOR spatial hash with per-axis
//! multipliers {1, 2654435761, 805459861} reduced mod `table_size`.
//! Interpolation is d-linear, features concatenate coarse to fine, and
//! feature tables initialize uniformly in [-1e-4, 1e-4].
//!
//! Derivative support: identity and Fourier encodings are smooth to any
//! order; the hash grid is piecewise multilinear, so its Jacobian exists
//! almost everywhere but second derivatives are refused upstream.

use crate::analytic::Analytic;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;
use crate::scalar::Scalar;

pub const HASH_MULTIPLIERS: [u32; 3] = [1, 2654435761, 805459861];

#[derive(Clone, Debug, PartialEq)]
pub struct FourierEncoder<F: Scalar = f64> {
    /// m x dim frequency matrix, cycles per unit coordinate.
    pub b: Matrix<F>,
    pub trainable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HashGrid<F: Scalar = f64> {
    pub dim: usize,
    pub n0: u32,
    pub growth: f64,
    pub table_size: usize,
    pub features: usize,
    /// One `table_size x features` table per level.
    pub tables: Vec<Matrix<F>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Encoder<F: Scalar = f64> {
    Identity { dim: usize },
    Fourier(FourierEncoder<F>),
    Hash(HashGrid<F>),
}

/// Construction recipe for an encoder; realized with a seeded RNG so runs
/// are reproducible. Random draws happen in a fixed order (row-major for
/// `B`, level-major then row-major for hash tables).
#[derive(Clone, Debug, PartialEq)]
pub enum EncoderSpec {
    Identity,
    /// `B` entries i.i.d. normal with standard deviation `sigma`.
    FourierGauss { m: usize, sigma: f64, trainable: bool },
    /// Axis-aligned octaves: for each octave `k < octaves` and axis `a`,
    /// one row with `2^k` cycles on axis `a` (row index `k * dim + a`).
    FourierLog { octaves: usize, trainable: bool },
    /// Caller-supplied frequency rows.
    FourierFixed { b: Vec<Vec<f64>>, trainable: bool },
    Hash {
        levels: usize,
        n0: u32,
        growth: f64,
        table_size: usize,
        features: usize,
    },
}

impl EncoderSpec {
    pub fn build<F: Scalar>(&self, dim: usize, rng: &mut Rng) -> Result<Encoder<F>> {
        match self {
            EncoderSpec::Identity => Ok(Encoder::Identity { dim }),
            EncoderSpec::FourierGauss { m, sigma, trainable } => {
                if *m == 0 || *sigma <= 0.0 {
                    return Err(Error::InvalidParam(
                        "fourier-gauss needs m > 0 and sigma > 0".into(),
                    ));
                }
                let b = Matrix::from_fn(*m, dim, |_, _| F::c(*sigma * rng.normal()));
                Ok(Encoder::Fourier(FourierEncoder { b, trainable: *trainable }))
            }
            EncoderSpec::FourierLog { octaves, trainable } => {
                if *octaves == 0 {
                    return Err(Error::InvalidParam("fourier-log needs octaves > 0".into()));
                }
                let m = octaves * dim;
                let b = Matrix::from_fn(m, dim, |i, j| {
                    let octave = i / dim;
                    let axis = i % dim;
                    if axis == j {
                        F::c((1u64 << octave) as f64)
                    } else {
                        F::zero()
                    }
                });
                Ok(Encoder::Fourier(FourierEncoder { b, trainable: *trainable }))
            }
            EncoderSpec::FourierFixed { b, trainable } => {
                if b.is_empty() || b.iter().any(|row| row.len() != dim) {
                    return Err(Error::InvalidParam(format!(
                        "fixed frequency rows must all have length {dim}"
                    )));
                }
                let m = b.len();
                let mat = Matrix::from_fn(m, dim, |i, j| F::c(b[i][j]));
                Ok(Encoder::Fourier(FourierEncoder { b: mat, trainable: *trainable }))
            }
            EncoderSpec::Hash { levels, n0, growth, table_size, features } => {
                if dim == 0 || dim > 3 {
                    return Err(Error::InvalidParam(format!(
                        "hash grid supports 1 to 3 input dimensions, got {dim}"
                    )));
                }
                if *levels == 0 || *n0 == 0 || *growth < 1.0 || *table_size == 0 || *features == 0
                {
                    return Err(Error::InvalidParam(
                        "hash grid needs levels, n0, features > 0, table_size > 0, growth >= 1"
                            .into(),
                    ));
                }
                let tables = (0..*levels)
                    .map(|_| {
                        Matrix::from_fn(*table_size, *features, |_, _| {
                            F::c(rng.uniform_in(-1e-4, 1e-4))
                        })
                    })
                    .collect();
                Ok(Encoder::Hash(HashGrid {
                    dim,
                    n0: *n0,
                    growth: *growth,
                    table_size: *table_size,
                    features: *features,
                    tables,
                }))
            }
        }
    }
}

impl<F: Scalar> Encoder<F> {
    pub fn in_dim(&self) -> usize {
        match self {
            Encoder::Identity { dim } => *dim,
            Encoder::Fourier(f) => f.b.cols(),
            Encoder::Hash(h) => h.dim,
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Encoder::Identity { dim } => *dim,
            Encoder::Fourier(f) => 2 * f.b.rows(),
            Encoder::Hash(h) => h.tables.len() * h.features,
        }
    }

    /// Highest input-derivative order this encoder can propagate.
    pub fn max_derivative_order(&self) -> usize {
        match self {
            Encoder::Hash(_) => 1,
            _ => 2,
        }
    }

    /// Number of trainable scalars (0 when nothing in the encoder trains).
    pub fn trainable_len(&self) -> usize {
        match self {
            Encoder::Identity { .. } => 0,
            Encoder::Fourier(f) => {
                if f.trainable {
                    f.b.rows() * f.b.cols()
                } else {
                    0
                }
            }
            Encoder::Hash(h) => h.tables.len() * h.table_size * h.features,
        }
    }

    /// Fast value-only encoding into a caller slice of length `out_dim()`.
    pub fn encode_into(&self, x: &[F], out: &mut [F]) {
        debug_assert_eq!(x.len(), self.in_dim());
        debug_assert_eq!(out.len(), self.out_dim());
        match self {
            Encoder::Identity { .. } => out.copy_from_slice(x),
            Encoder::Fourier(f) => {
                let m = f.b.rows();
                let tau = F::TAU();
                for i in 0..m {
                    let mut dot = F::zero();
                    for (&b, &xv) in f.b.row(i).iter().zip(x) {
                        dot += b * xv;
                    }
                    let phase = tau * dot;
                    out[i] = num_traits::Float::cos(phase);
                    out[m + i] = num_traits::Float::sin(phase);
                }
            }
            Encoder::Hash(h) => {
                for (level, table) in h.tables.iter().enumerate() {
                    let n = h.resolution(level);
                    let cell = CellPosition::locate_f(h, n, x);
                    let fslice = &mut out[level * h.features..(level + 1) * h.features];
                    fslice.iter_mut().for_each(|v| *v = F::zero());
                    for corner in 0..(1usize << h.dim) {
                        let (w, idx) = cell.corner_weight_index(h, n, corner);
                        let row = table.row(idx);
                        for (o, &t) in fslice.iter_mut().zip(row) {
                            *o += w * t;
                        }
                    }
                }
            }
        }
    }

    pub fn encode(&self, x: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.out_dim()];
        self.encode_into(x, &mut out);
        out
    }

    /// Structure-only view used by the generic evaluation path.
    pub fn shape(&self) -> EncShape {
        match self {
            Encoder::Identity { dim } => EncShape::Identity { dim: *dim },
            Encoder::Fourier(f) => EncShape::Fourier { m: f.b.rows(), dim: f.b.cols() },
            Encoder::Hash(h) => EncShape::Hash {
                dim: h.dim,
                levels: h.tables.len(),
                n0: h.n0,
                growth: h.growth,
                table_size: h.table_size,
                features: h.features,
            },
        }
    }
}

impl<F: Scalar> HashGrid<F> {
    pub fn resolution(&self, level: usize) -> u32 {
        resolution(self.n0, self.growth, level)
    }

    /// Whether a level's vertex lattice fits in its table, making direct
    /// (collision-free) indexing applicable.
    pub fn level_uses_direct(&self, level: usize) -> bool {
        lattice_fits(self.resolution(level), self.dim, self.table_size)
    }
}

pub fn resolution(n0: u32, growth: f64, level: usize) -> u32 {
    ((n0 as f64) * growth.powi(level as i32)).floor() as u32
}

fn lattice_fits(n: u32, dim: usize, table_size: usize) -> bool {
    let vertices = (n as u128 + 1).pow(dim as u32);
    vertices <= table_size as u128
}

/// Vertex-to-row mapping for one level.
pub fn vertex_index(v: &[u32], n: u32, dim: usize, table_size: usize) -> usize {
    if lattice_fits(n, dim, table_size) {
        let mut idx: usize = 0;
        let mut stride: usize = 1;
        for &vi in v.iter().take(dim) {
            idx += vi as usize * stride;
            stride *= n as usize + 1;
        }
        idx
    } else {
        let mut h: u32 = 0;
        for (a, &vi) in v.iter().take(dim).enumerate() {
            h ^= vi.wrapping_mul(HASH_MULTIPLIERS[a]);
        }
        (h as usize) % table_size
    }
}

/// Continuous position of `x` within a level's cell lattice.
struct CellPosition {
    cell: [u32; 3],
    frac: [f64; 3],
}

impl CellPosition {
    fn locate(n: u32, dim: usize, xp: &[f64]) -> CellPosition {
        let mut cell = [0u32; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..dim {
            // [-1, 1] -> [0, n]; the upper edge folds into the last cell.
            let pos = (xp[a] + 1.0) * 0.5 * n as f64;
            let c = pos.floor().clamp(0.0, (n - 1) as f64);
            cell[a] = c as u32;
            frac[a] = pos - c;
        }
        CellPosition { cell, frac }
    }

    fn locate_f<F: Scalar>(h: &HashGrid<F>, n: u32, x: &[F]) -> CellPosition {
        let xp: Vec<f64> = x.iter().map(|v| v.primal()).collect();
        Self::locate(n, h.dim, &xp)
    }

    fn corner_weight_index<F: Scalar>(
        &self,
        h: &HashGrid<F>,
        n: u32,
        corner: usize,
    ) -> (F, usize) {
        let mut w = 1.0f64;
        let mut v = [0u32; 3];
        for a in 0..h.dim {
            let bit = (corner >> a) & 1;
            v[a] = self.cell[a] + bit as u32;
            w *= if bit == 1 { self.frac[a] } else { 1.0 - self.frac[a] };
        }
        (F::c(w), vertex_index(&v, n, h.dim, h.table_size))
    }
}

/// Structural description of an encoder, free of parameter values.
#[derive(Clone, Debug)]
pub enum EncShape {
    Identity { dim: usize },
    Fourier { m: usize, dim: usize },
    Hash {
        dim: usize,
        levels: usize,
        n0: u32,
        growth: f64,
        table_size: usize,
        features: usize,
    },
}

impl EncShape {
    pub fn out_dim(&self) -> usize {
        match self {
            EncShape::Identity { dim } => *dim,
            EncShape::Fourier { m, .. } => 2 * m,
            EncShape::Hash { levels, features, .. } => levels * features,
        }
    }
}

/// Encoder parameters lifted into the evaluation type `T` (plain scalars or
/// tape values).
pub struct EncParams<'a, T> {
    /// Fourier frequency matrix, m*dim row-major.
    pub fourier_b: Option<&'a [T]>,
    /// Hash tables, one `table_size * features` row-major block per level.
    pub hash_tables: Option<&'a [Vec<T>]>,
}

/// Encoded value with optional input derivatives, all in `T`.
///
/// `jac[e * dim + a]` is the derivative of output `e` along axis `a`;
/// `hess_diag` holds the pure second derivatives, same layout.
pub struct EncOut<T> {
    pub value: Vec<T>,
    pub jac: Vec<T>,
    pub hess_diag: Vec<T>,
}

/// Evaluate an encoder generically, with derivatives up to `order`
/// (0, 1, or 2). The hash branch supports orders 0 and 1; asking it for 2
/// is a caller bug guarded upstream.
pub fn encode_generic<T: Analytic>(
    shape: &EncShape,
    params: &EncParams<T>,
    x: &[T],
    order: usize,
) -> EncOut<T> {
    let zero = x[0].konst(0.0);
    match shape {
        EncShape::Identity { dim } => {
            let d = *dim;
            let mut jac = Vec::new();
            let mut hess = Vec::new();
            if order >= 1 {
                jac = vec![zero; d * d];
                for a in 0..d {
                    jac[a * d + a] = x[0].konst(1.0);
                }
            }
            if order >= 2 {
                hess = vec![zero; d * d];
            }
            EncOut { value: x.to_vec(), jac, hess_diag: hess }
        }
        EncShape::Fourier { m, dim } => {
            let (m, d) = (*m, *dim);
            let b = params.fourier_b.expect("fourier params missing");
            let tau = x[0].konst(std::f64::consts::TAU);
            let mut value = vec![zero; 2 * m];
            let mut jac = if order >= 1 { vec![zero; 2 * m * d] } else { Vec::new() };
            let mut hess = if order >= 2 { vec![zero; 2 * m * d] } else { Vec::new() };
            for i in 0..m {
                let mut dot = zero;
                for a in 0..d {
                    dot = dot + b[i * d + a] * x[a];
                }
                let phase = tau * dot;
                let (c, s) = (phase.cos(), phase.sin());
                value[i] = c;
                value[m + i] = s;
                if order >= 1 {
                    for a in 0..d {
                        let w = tau * b[i * d + a];
                        jac[i * d + a] = -w * s;
                        jac[(m + i) * d + a] = w * c;
                        if order >= 2 {
                            let w2 = w.sq();
                            hess[i * d + a] = -w2 * c;
                            hess[(m + i) * d + a] = -w2 * s;
                        }
                    }
                }
            }
            EncOut { value, jac, hess_diag: hess }
        }
        EncShape::Hash { dim, levels, n0, growth, table_size, features } => {
            debug_assert!(order <= 1, "hash grid cannot propagate second derivatives");
            let d = *dim;
            let nf = *features;
            let tables = params.hash_tables.expect("hash params missing");
            let out_dim = levels * nf;
            let mut value = vec![zero; out_dim];
            let mut jac = if order >= 1 { vec![zero; out_dim * d] } else { Vec::new() };
            let xp: Vec<f64> = x.iter().map(|v| v.primal()).collect();
            for level in 0..*levels {
                let n = resolution(*n0, *growth, level);
                let cell = CellPosition::locate(n, d, &xp);
                // Differentiable fractional offsets within the cell:
                // frac_a = (x_a + 1)/2 * n − cell_a.
                let half_n = x[0].konst(0.5 * n as f64);
                let fr: Vec<T> = (0..d)
                    .map(|a| {
                        (x[a] + x[0].konst(1.0)) * half_n - x[0].konst(cell.cell[a] as f64)
                    })
                    .collect();
                for corner in 0..(1usize << d) {
                    let mut v = [0u32; 3];
                    for a in 0..d {
                        v[a] = cell.cell[a] + ((corner >> a) & 1) as u32;
                    }
                    let idx = vertex_index(&v, n, d, *table_size);
                    let mut w = x[0].konst(1.0);
                    for (a, f) in fr.iter().enumerate().take(d) {
                        let bit = (corner >> a) & 1;
                        w = w * if bit == 1 { *f } else { x[0].konst(1.0) - *f };
                    }
                    for f in 0..nf {
                        let feat = tables[level][idx * nf + f];
                        let e = level * nf + f;
                        value[e] = value[e] + w * feat;
                        if order >= 1 {
                            for a in 0..d {
                                // d w / d x_a = (+-1) * prod of the other
                                // factors * n/2.
                                let mut dw = x[0].konst(0.5 * n as f64);
                                for (a2, f2) in fr.iter().enumerate().take(d) {
                                    let bit2 = (corner >> a2) & 1;
                                    if a2 == a {
                                        if bit2 == 0 {
                                            dw = -dw;
                                        }
                                    } else {
                                        dw = dw
                                            * if bit2 == 1 {
                                                *f2
                                            } else {
                                                x[0].konst(1.0) - *f2
                                            };
                                    }
                                }
                                jac[e * d + a] = jac[e * d + a] + dw * feat;
                            }
                        }
                    }
                }
            }
            EncOut { value, jac, hess_diag: Vec::new() }
        }
    }
}
