//! Objectives: what a field is fit to match, and the gradients of that.
//!
//! A [`SampledSignal`] is a set of coordinate/value measurements with
//! optional derivative targets. An [`Objective`] weights up to three
//! mean-squared terms: values, Jacobians, and Laplacians. Whether a term
//! is admissible depends on the field (atom smoothness, encoder), checked
//! via [`crate::model::Field::check_derivative_order`].
//!
//! Gradients take one of two routes:
//! * value-only objectives use the batched trace/backward path — matrix
//!   arithmetic, chunk-parallel, the training hot path;
//! * any derivative-supervised term switches to a per-sample reverse-mode
//!   tape over the generic evaluation, which differentiates through the
//!   input-derivative propagation itself.
//!
//! The two routes are cross-checked against each other and against finite
//! differences in the tests; per-sample work is chunked at a fixed size
//! and reduced in order, so results are independent of the thread count.

use crate::analytic::Analytic;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Field, NetParams};
use crate::encoding::{EncParams, Encoder};
use crate::scalar::Scalar;
use crate::signal::sample::{self, GridShape};
use crate::signal::{Audio, Image};
use crate::tape::{Tape, Tv};
use rayon::prelude::*;

/// Samples per tape-path work unit; fixed so reduction order is stable.
const TAPE_CHUNK: usize = 32;

/// Coordinate/value measurements, with optional derivative targets.
///
/// `xs` is n x d, `ys` n x c. Jacobian targets are n x (c*d) with entry
/// `c*d + a` holding d y_c / d x_a, matching [`crate::model::PointEval`];
/// Laplacian targets are n x c.
#[derive(Clone, Debug)]
pub struct SampledSignal<F: Scalar = f64> {
    pub xs: Matrix<F>,
    pub ys: Matrix<F>,
    pub jac: Option<Matrix<F>>,
    pub lap: Option<Matrix<F>>,
    /// Lattice geometry when the samples form a regular grid; enables
    /// grid-aware consumers (PSNR logging, forward operators, spectra).
    pub grid: Option<GridShape>,
}

impl<F: Scalar> SampledSignal<F> {
    pub fn new(xs: Matrix<F>, ys: Matrix<F>) -> Result<Self> {
        if xs.rows() == 0 {
            return Err(Error::EmptyMeasurement);
        }
        if xs.rows() != ys.rows() {
            return Err(Error::Incompatible(format!(
                "{} coordinates vs {} values",
                xs.rows(),
                ys.rows()
            )));
        }
        Ok(SampledSignal { xs, ys, jac: None, lap: None, grid: None })
    }

    pub fn with_grid(mut self, grid: GridShape) -> Result<Self> {
        if grid.len() != self.len() {
            return Err(Error::Incompatible(format!(
                "grid of {} vs {} samples",
                grid.len(),
                self.len()
            )));
        }
        self.grid = Some(grid);
        Ok(self)
    }

    pub fn with_jacobian(mut self, jac: Matrix<F>) -> Result<Self> {
        if jac.rows() != self.xs.rows() || jac.cols() != self.ys.cols() * self.xs.cols() {
            return Err(Error::Incompatible(
                "jacobian targets must be n x (channels * dims)".into(),
            ));
        }
        self.jac = Some(jac);
        Ok(self)
    }

    pub fn with_laplacian(mut self, lap: Matrix<F>) -> Result<Self> {
        if lap.rows() != self.xs.rows() || lap.cols() != self.ys.cols() {
            return Err(Error::Incompatible("laplacian targets must be n x channels".into()));
        }
        self.lap = Some(lap);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.xs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.xs.cols(), self.ys.cols())
    }

    pub fn from_image(img: &Image) -> Self {
        let (xs, ys) = sample::image_samples(img);
        let grid = Some(GridShape::Two(img.width, img.height));
        SampledSignal { xs, ys, jac: None, lap: None, grid }
    }

    pub fn from_audio(audio: &Audio) -> Self {
        let (xs, ys) = sample::audio_samples(audio);
        let grid = Some(GridShape::One(audio.samples.len()));
        SampledSignal { xs, ys, jac: None, lap: None, grid }
    }

    /// Row-gather for minibatching.
    pub fn subsample(&self, idx: &[usize]) -> Self {
        let gather = |m: &Matrix<F>| {
            Matrix::from_fn(idx.len(), m.cols(), |i, j| m[(idx[i], j)])
        };
        SampledSignal {
            xs: gather(&self.xs),
            ys: gather(&self.ys),
            jac: self.jac.as_ref().map(&gather),
            lap: self.lap.as_ref().map(&gather),
            grid: None,
        }
    }
}

/// Weighted mean-squared objective over values and input derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Objective {
    pub value_weight: f64,
    pub jacobian_weight: f64,
    pub laplacian_weight: f64,
}

impl Default for Objective {
    fn default() -> Self {
        Objective::value()
    }
}

impl Objective {
    /// Plain value regression.
    pub fn value() -> Self {
        Objective { value_weight: 1.0, jacobian_weight: 0.0, laplacian_weight: 0.0 }
    }

    /// Input-derivative order the objective needs from the field.
    pub fn required_order(&self) -> usize {
        if self.laplacian_weight > 0.0 {
            2
        } else if self.jacobian_weight > 0.0 {
            1
        } else {
            0
        }
    }

    pub fn validate<F: Scalar>(&self, data: &SampledSignal<F>) -> Result<()> {
        for w in [self.value_weight, self.jacobian_weight, self.laplacian_weight] {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidParam("objective weights must be >= 0".into()));
            }
        }
        if self.value_weight + self.jacobian_weight + self.laplacian_weight <= 0.0 {
            return Err(Error::InvalidParam("objective has no active term".into()));
        }
        if self.jacobian_weight > 0.0 && data.jac.is_none() {
            return Err(Error::Incompatible(
                "jacobian term is active but the signal has no jacobian targets".into(),
            ));
        }
        if self.laplacian_weight > 0.0 && data.lap.is_none() {
            return Err(Error::Incompatible(
                "laplacian term is active but the signal has no laplacian targets".into(),
            ));
        }
        Ok(())
    }
}

/// Objective value and the gradient with respect to the field's trainable
/// parameters, flattened in the shared order.
pub fn loss_and_grad<F: Scalar>(
    field: &Field<F>,
    data: &SampledSignal<F>,
    obj: &Objective,
) -> Result<(f64, Vec<F>)> {
    obj.validate(data)?;
    field.check_derivative_order(obj.required_order())?;
    if obj.required_order() == 0 {
        Ok(value_loss_and_grad(field, data, obj.value_weight))
    } else {
        Ok(tape_loss_and_grad(field, data, obj))
    }
}

/// Objective value only (no gradient); derivative terms run on the plain
/// per-sample path.
pub fn loss_only<F: Scalar>(
    field: &Field<F>,
    data: &SampledSignal<F>,
    obj: &Objective,
) -> Result<f64> {
    obj.validate(data)?;
    field.check_derivative_order(obj.required_order())?;
    let n = data.len();
    let (d, c) = data.dims();
    let mut loss = 0.0f64;
    if obj.value_weight > 0.0 && obj.required_order() == 0 {
        let out = field.forward_batch(&data.xs);
        let mut acc = 0.0;
        for (o, y) in out.data().iter().zip(data.ys.data()) {
            let r = (*o - *y).primal();
            acc += r * r;
        }
        loss += obj.value_weight * acc;
    } else {
        // Per-sample path covers mixed terms in one evaluation each.
        let order = obj.required_order();
        let chunks: Vec<f64> = (0..n.div_ceil(TAPE_CHUNK))
            .into_par_iter()
            .map(|ci| {
                let lo = ci * TAPE_CHUNK;
                let hi = (lo + TAPE_CHUNK).min(n);
                let mut acc = 0.0;
                for i in lo..hi {
                    let pe = field
                        .eval_point(data.xs.row(i), order)
                        .expect("order checked above");
                    for ch in 0..c {
                        if obj.value_weight > 0.0 {
                            let r = (pe.value[ch] - data.ys[(i, ch)]).primal();
                            acc += obj.value_weight * r * r;
                        }
                        if obj.jacobian_weight > 0.0 {
                            let tj = data.jac.as_ref().unwrap();
                            for a in 0..d {
                                let r =
                                    (pe.jac[ch * d + a] - tj[(i, ch * d + a)]).primal();
                                acc += obj.jacobian_weight * r * r;
                            }
                        }
                        if obj.laplacian_weight > 0.0 {
                            let tl = data.lap.as_ref().unwrap();
                            let mut lapv = 0.0;
                            for a in 0..d {
                                lapv += pe.hess_diag[ch * d + a].primal();
                            }
                            let r = lapv - tl[(i, ch)].primal();
                            acc += obj.laplacian_weight * r * r;
                        }
                    }
                }
                acc
            })
            .collect();
        for acc in chunks {
            loss += acc;
        }
    }
    Ok(loss / n as f64)
}

/// Mean squared error of values only; the PSNR ingredient.
pub fn value_mse<F: Scalar>(field: &Field<F>, xs: &Matrix<F>, ys: &Matrix<F>) -> f64 {
    let out = field.forward_batch(xs);
    let mut acc = 0.0;
    for (o, y) in out.data().iter().zip(ys.data()) {
        let r = (*o - *y).primal();
        acc += r * r;
    }
    acc / (ys.rows() * ys.cols()) as f64
}

/// Fast path: batched forward, analytic matrix backprop of the value MSE.
fn value_loss_and_grad<F: Scalar>(
    field: &Field<F>,
    data: &SampledSignal<F>,
    weight: f64,
) -> (f64, Vec<F>) {
    let n = data.len();
    let trace = field.forward_trace(&data.xs);
    let scale = F::c(2.0 * weight / n as f64);
    let mut loss = 0.0f64;
    let mut douts = Vec::with_capacity(trace.chunks.len());
    let mut row0 = 0;
    for ch in &trace.chunks {
        let rows = ch.out.rows();
        let c = ch.out.cols();
        let mut dout = Matrix::zeros(rows, c);
        for i in 0..rows {
            for j in 0..c {
                let r = ch.out[(i, j)] - data.ys[(row0 + i, j)];
                loss += r.primal() * r.primal();
                dout[(i, j)] = scale * r;
            }
        }
        douts.push(dout);
        row0 += rows;
    }
    let grads = field.backward(&trace, &douts);
    (weight * loss / n as f64, grads.flatten())
}

/// Tape path: per-sample reverse-mode differentiation through the generic
/// evaluation with input derivatives.
fn tape_loss_and_grad<F: Scalar>(
    field: &Field<F>,
    data: &SampledSignal<F>,
    obj: &Objective,
) -> (f64, Vec<F>) {
    let n = data.len();
    let (d, c) = data.dims();
    let order = obj.required_order();
    let shape = field.net_shape();
    let mut flat = Vec::new();
    field.write_params(&mut flat);
    let flat64: Vec<f64> = flat.iter().map(|v| v.primal()).collect();
    let p = flat64.len();

    let per_chunk: Vec<(f64, Vec<f64>)> = (0..n.div_ceil(TAPE_CHUNK))
        .into_par_iter()
        .map(|ci| {
            let lo = ci * TAPE_CHUNK;
            let hi = (lo + TAPE_CHUNK).min(n);
            let mut loss = 0.0f64;
            let mut grad = vec![0.0f64; p];
            for i in lo..hi {
                let tape = Tape::new();
                let leaves = tape.leaves(&flat64);

                // Frozen Fourier frequencies enter as extra leaves whose
                // adjoints are simply never read.
                let frozen_b: Vec<Tv<'_>> = match &field.encoder {
                    Encoder::Fourier(f) if !f.trainable => {
                        f.b.data().iter().map(|v| tape.leaf(v.primal())).collect()
                    }
                    _ => Vec::new(),
                };
                let mut consumed = 0;
                let mut hash_tables: Vec<Vec<Tv<'_>>> = Vec::new();
                let fourier_b: Option<&[Tv<'_>]> = match &field.encoder {
                    Encoder::Identity { .. } => None,
                    Encoder::Fourier(f) => {
                        if f.trainable {
                            let len = f.b.rows() * f.b.cols();
                            consumed = len;
                            Some(&leaves[..len])
                        } else {
                            Some(&frozen_b)
                        }
                    }
                    Encoder::Hash(h) => {
                        let block = h.table_size * h.features;
                        for level in 0..h.tables.len() {
                            hash_tables
                                .push(leaves[level * block..(level + 1) * block].to_vec());
                        }
                        consumed = h.tables.len() * block;
                        None
                    }
                };
                let mut pos = consumed;
                let mut layer_slices = Vec::with_capacity(field.net.layers.len());
                for l in &field.net.layers {
                    let nw = l.w.rows() * l.w.cols();
                    let nb = l.b.len();
                    layer_slices.push((&leaves[pos..pos + nw], &leaves[pos + nw..pos + nw + nb]));
                    pos += nw + nb;
                }
                let now = field.net.out_w.rows() * field.net.out_w.cols();
                let params = NetParams {
                    enc: EncParams {
                        fourier_b,
                        hash_tables: if hash_tables.is_empty() {
                            None
                        } else {
                            Some(&hash_tables)
                        },
                    },
                    layers: layer_slices,
                    out_w: &leaves[pos..pos + now],
                    out_b: &leaves[pos + now..],
                };

                let x: Vec<Tv<'_>> =
                    data.xs.row(i).iter().map(|v| tape.leaf(v.primal())).collect();
                let pe = crate::model::eval_generic(&shape, &params, &x, order);

                let mut ls = x[0].konst(0.0);
                for ch in 0..c {
                    if obj.value_weight > 0.0 {
                        let r = pe.value[ch] - x[0].konst(data.ys[(i, ch)].primal());
                        ls = ls + x[0].konst(obj.value_weight) * r.sq();
                    }
                    if obj.jacobian_weight > 0.0 {
                        let tj = data.jac.as_ref().unwrap();
                        for a in 0..d {
                            let r =
                                pe.jac[ch * d + a] - x[0].konst(tj[(i, ch * d + a)].primal());
                            ls = ls + x[0].konst(obj.jacobian_weight) * r.sq();
                        }
                    }
                    if obj.laplacian_weight > 0.0 {
                        let tl = data.lap.as_ref().unwrap();
                        let mut lap = x[0].konst(0.0);
                        for a in 0..d {
                            lap = lap + pe.hess_diag[ch * d + a];
                        }
                        let r = lap - x[0].konst(tl[(i, ch)].primal());
                        ls = ls + x[0].konst(obj.laplacian_weight) * r.sq();
                    }
                }
                loss += ls.value();
                let adj = tape.gradient(ls);
                for (k, leaf) in leaves.iter().enumerate() {
                    grad[k] += adj[leaf.index()];
                }
            }
            (loss, grad)
        })
        .collect();

    let mut loss = 0.0f64;
    let mut grad = vec![0.0f64; p];
    for (l, g) in &per_chunk {
        loss += l;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += *b;
        }
    }
    let inv_n = 1.0 / n as f64;
    (loss * inv_n, grad.iter().map(|&g| F::c(g * inv_n)).collect())
}
