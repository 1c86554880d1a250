//! Coordinate fields: an input encoding followed by an MLP whose hidden
//! layers apply `h <- psi(omega * (W h + b))` with a per-layer activation
//! atom and frequency scale, and an affine output layer.
//!
//! Two evaluation paths exist and are cross-checked in tests:
//!
//! * a batched, chunk-parallel path over sample matrices (`forward_batch`,
//!   `forward_trace` + `backward`) used by the trainers for value-domain
//!   losses — chunks have a fixed row count and gradients reduce in chunk
//!   order, so results do not depend on the thread count;
//! * a per-sample generic path (`eval_generic`) over any [`Analytic`]
//!   value type, which propagates input derivatives (Jacobian and pure
//!   second derivatives per axis) and also runs on tape values so
//!   derivative-domain objectives can backpropagate through it.
//!
//! Parameter flattening order is fixed and shared by the optimizer and the
//! model file payload: encoder parameters first (Fourier frequency matrix
//! row-major, or hash tables level-major then row-major), then each hidden
//! layer's weights row-major followed by its bias, then the output layer's.

use crate::analytic::Analytic;
use crate::atom::{Atom, Smoothness};
use crate::encoding::{encode_generic, EncParams, EncShape, Encoder, EncoderSpec};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use rayon::prelude::*;

/// Rows per parallel work unit. Fixed (not derived from the thread count)
/// so chunk boundaries, and therefore floating-point reduction order, are
/// identical for any number of threads.
pub const CHUNK_ROWS: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct Layer<F: Scalar = f64> {
    /// out x in weight matrix.
    pub w: Matrix<F>,
    pub b: Vec<F>,
    pub atom: Atom,
    /// Frequency scale applied to the pre-activation.
    pub omega: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<F: Scalar = f64> {
    pub layers: Vec<Layer<F>>,
    /// c x width output weights.
    pub out_w: Matrix<F>,
    pub out_b: Vec<F>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field<F: Scalar = f64> {
    pub encoder: Encoder<F>,
    pub net: Mlp<F>,
}

/// Architecture description; realized into a [`Field`] with an RNG and an
/// initialization scheme (see [`crate::init`]).
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub encoder: EncoderSpec,
    pub hidden: Vec<LayerSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerSpec {
    pub width: usize,
    pub atom: Atom,
}

impl FieldSpec {
    pub fn validate(&self) -> Result<()> {
        if self.in_dim == 0 || self.out_dim == 0 {
            return Err(Error::InvalidParam("field needs in_dim, out_dim > 0".into()));
        }
        for l in &self.hidden {
            if l.width == 0 {
                return Err(Error::InvalidParam("hidden width must be > 0".into()));
            }
            l.atom.validate()?;
        }
        Ok(())
    }

    /// Trainable parameter count of the realized field, without building it.
    pub fn param_count(&self, encoder_trainable_len: impl FnOnce() -> usize) -> usize {
        let mut n = encoder_trainable_len();
        let mut fan_in = match &self.encoder {
            EncoderSpec::Identity => self.in_dim,
            EncoderSpec::FourierGauss { m, .. } => 2 * m,
            EncoderSpec::FourierLog { octaves, .. } => 2 * octaves * self.in_dim,
            EncoderSpec::FourierFixed { b, .. } => 2 * b.len(),
            EncoderSpec::Hash { levels, features, .. } => levels * features,
        };
        for l in &self.hidden {
            n += l.width * fan_in + l.width;
            fan_in = l.width;
        }
        n + self.out_dim * fan_in + self.out_dim
    }
}

/// One parallel work unit of a traced forward pass.
pub struct ChunkTrace<F: Scalar = f64> {
    /// Raw inputs, n x d (kept for encoder gradients).
    pub xs: Matrix<F>,
    /// Encoded inputs, n x e.
    pub enc: Matrix<F>,
    /// Per hidden layer: activations psi(u), n x width.
    pub act: Vec<Matrix<F>>,
    /// Per hidden layer: psi'(u), n x width.
    pub d1: Vec<Matrix<F>>,
    /// Network outputs, n x c.
    pub out: Matrix<F>,
}

pub struct Trace<F: Scalar = f64> {
    pub chunks: Vec<ChunkTrace<F>>,
    pub rows: usize,
}

impl<F: Scalar> Trace<F> {
    /// Concatenated outputs across chunks, n x c.
    pub fn outputs(&self) -> Matrix<F> {
        let c = self.chunks[0].out.cols();
        let mut out = Matrix::zeros(self.rows, c);
        let mut r = 0;
        for ch in &self.chunks {
            for i in 0..ch.out.rows() {
                out.row_mut(r).copy_from_slice(ch.out.row(i));
                r += 1;
            }
        }
        out
    }
}

/// Parameter gradients, shaped like the field's trainable parameters.
#[derive(Clone, Debug)]
pub struct Gradients<F: Scalar = f64> {
    /// Flattened trainable encoder gradients (empty when the encoder has
    /// no trainable parameters); layout matches the parameter flattening.
    pub encoder: Vec<F>,
    pub layers: Vec<(Matrix<F>, Vec<F>)>,
    pub out_w: Matrix<F>,
    pub out_b: Vec<F>,
}

impl<F: Scalar> Gradients<F> {
    pub fn zeros_like(field: &Field<F>) -> Self {
        Gradients {
            encoder: vec![F::zero(); field.encoder.trainable_len()],
            layers: field
                .net
                .layers
                .iter()
                .map(|l| (Matrix::zeros(l.w.rows(), l.w.cols()), vec![F::zero(); l.b.len()]))
                .collect(),
            out_w: Matrix::zeros(field.net.out_w.rows(), field.net.out_w.cols()),
            out_b: vec![F::zero(); field.net.out_b.len()],
        }
    }

    pub fn add_in_place(&mut self, other: &Gradients<F>) {
        for (a, b) in self.encoder.iter_mut().zip(&other.encoder) {
            *a += *b;
        }
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            w.add_scaled(ow, F::one());
            for (x, y) in b.iter_mut().zip(ob) {
                *x += *y;
            }
        }
        self.out_w.add_scaled(&other.out_w, F::one());
        for (x, y) in self.out_b.iter_mut().zip(&other.out_b) {
            *x += *y;
        }
    }

    pub fn scale(&mut self, s: F) {
        for v in &mut self.encoder {
            *v *= s;
        }
        for (w, b) in &mut self.layers {
            w.scale(s);
            for v in b {
                *v *= s;
            }
        }
        self.out_w.scale(s);
        for v in &mut self.out_b {
            *v *= s;
        }
    }

    /// Flatten into the shared parameter order.
    pub fn flatten(&self) -> Vec<F> {
        let mut out = self.encoder.clone();
        for (w, b) in &self.layers {
            out.extend_from_slice(w.data());
            out.extend_from_slice(b);
        }
        out.extend_from_slice(self.out_w.data());
        out.extend_from_slice(&self.out_b);
        out
    }
}

/// Structural view of a field, free of parameter values; paired with
/// [`NetParams`] for the generic evaluation path.
#[derive(Clone, Debug)]
pub struct NetShape {
    pub enc: EncShape,
    /// Per hidden layer: (out_width, in_width).
    pub dims: Vec<(usize, usize)>,
    pub atoms: Vec<(Atom, f64)>,
    /// (out_dim, last_width).
    pub out: (usize, usize),
}

/// Field parameters lifted into an evaluation type `T`.
pub struct NetParams<'a, T> {
    pub enc: EncParams<'a, T>,
    /// Per hidden layer: (weights row-major, bias).
    pub layers: Vec<(&'a [T], &'a [T])>,
    pub out_w: &'a [T],
    pub out_b: &'a [T],
}

/// Value and input derivatives of a field at one point, in `T`.
/// `jac[c * d + a]` = d out_c / d x_a; `hess_diag` holds the pure second
/// derivatives in the same layout. Empty below the requested order.
pub struct PointEval<T> {
    pub value: Vec<T>,
    pub jac: Vec<T>,
    pub hess_diag: Vec<T>,
}

/// Evaluate the network at one point with input derivatives up to `order`.
/// Derivative-order support is enforced by the callers via
/// [`Field::check_derivative_order`]; this function assumes it holds.
pub fn eval_generic<T: Analytic>(
    shape: &NetShape,
    params: &NetParams<T>,
    x: &[T],
    order: usize,
) -> PointEval<T> {
    let d = x.len();
    let zero = x[0].konst(0.0);
    let e = encode_generic(&shape.enc, &params.enc, x, order);
    let mut h = e.value;
    let mut jh = e.jac;
    let mut hh = e.hess_diag;

    for (l, &(wo, wi)) in shape.dims.iter().enumerate() {
        let (w, b) = params.layers[l];
        let (atom, omega) = &shape.atoms[l];
        let om = x[0].konst(*omega);
        let mut nh = vec![zero; wo];
        let mut njh = if order >= 1 { vec![zero; wo * d] } else { Vec::new() };
        let mut nhh = if order >= 2 { vec![zero; wo * d] } else { Vec::new() };
        for i in 0..wo {
            let row = &w[i * wi..(i + 1) * wi];
            let mut z = b[i];
            for j in 0..wi {
                z = z + row[j] * h[j];
            }
            let u = om * z;
            let (v, d1, d2) = atom.eval(u);
            nh[i] = v;
            if order >= 1 {
                for a in 0..d {
                    let mut ju = zero;
                    for j in 0..wi {
                        ju = ju + row[j] * jh[j * d + a];
                    }
                    ju = om * ju;
                    njh[i * d + a] = d1 * ju;
                    if order >= 2 {
                        let mut hu = zero;
                        for j in 0..wi {
                            hu = hu + row[j] * hh[j * d + a];
                        }
                        hu = om * hu;
                        nhh[i * d + a] = d2 * ju.sq() + d1 * hu;
                    }
                }
            }
        }
        h = nh;
        jh = njh;
        hh = nhh;
    }

    let (c, wi) = shape.out;
    let mut value = vec![zero; c];
    let mut jac = if order >= 1 { vec![zero; c * d] } else { Vec::new() };
    let mut hess = if order >= 2 { vec![zero; c * d] } else { Vec::new() };
    for i in 0..c {
        let row = &params.out_w[i * wi..(i + 1) * wi];
        let mut z = params.out_b[i];
        for j in 0..wi {
            z = z + row[j] * h[j];
        }
        value[i] = z;
        if order >= 1 {
            for a in 0..d {
                let mut jv = zero;
                let mut hv = zero;
                for j in 0..wi {
                    jv = jv + row[j] * jh[j * d + a];
                    if order >= 2 {
                        hv = hv + row[j] * hh[j * d + a];
                    }
                }
                jac[i * d + a] = jv;
                if order >= 2 {
                    hess[i * d + a] = hv;
                }
            }
        }
    }
    PointEval { value, jac, hess_diag: hess }
}

impl<F: Scalar> Field<F> {
    pub fn in_dim(&self) -> usize {
        self.encoder.in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.net.out_w.rows()
    }

    pub fn net_shape(&self) -> NetShape {
        NetShape {
            enc: self.encoder.shape(),
            dims: self.net.layers.iter().map(|l| (l.w.rows(), l.w.cols())).collect(),
            atoms: self.net.layers.iter().map(|l| (l.atom.clone(), l.omega)).collect(),
            out: (self.net.out_w.rows(), self.net.out_w.cols()),
        }
    }

    /// Borrow all parameters in evaluation form. Hash tables are cloned
    /// into flat rows; the other variants borrow directly.
    pub fn params_view(&self) -> (NetParams<'_, F>, Vec<Vec<F>>) {
        let (fourier_b, hash_tables) = match &self.encoder {
            Encoder::Identity { .. } => (None, Vec::new()),
            Encoder::Fourier(f) => (Some(f.b.data()), Vec::new()),
            Encoder::Hash(h) => {
                (None, h.tables.iter().map(|t| t.data().to_vec()).collect::<Vec<_>>())
            }
        };
        let layers = self
            .net
            .layers
            .iter()
            .map(|l| (l.w.data(), l.b.as_slice()))
            .collect();
        (
            NetParams {
                enc: EncParams { fourier_b, hash_tables: None },
                layers,
                out_w: self.net.out_w.data(),
                out_b: &self.net.out_b,
            },
            hash_tables,
        )
    }

    /// Highest input-derivative order the field supports: bounded by the
    /// encoder and by the least smooth atom (C0 supports values only,
    /// C1 first derivatives, smooth atoms second derivatives).
    pub fn max_derivative_order(&self) -> usize {
        let mut order = self.encoder.max_derivative_order();
        for l in &self.net.layers {
            let atom_order = match l.atom.smoothness() {
                Smoothness::C0 => 0,
                Smoothness::C1 => 1,
                Smoothness::CInf => 2,
            };
            order = order.min(atom_order);
        }
        order
    }

    pub fn check_derivative_order(&self, order: usize) -> Result<()> {
        if order <= self.max_derivative_order() {
            return Ok(());
        }
        if self.encoder.max_derivative_order() < order {
            return Err(Error::UnsupportedDerivative(format!(
                "encoder supports input derivatives up to order {}, requested {order}",
                self.encoder.max_derivative_order()
            )));
        }
        let worst = self
            .net
            .layers
            .iter()
            .map(|l| &l.atom)
            .min_by_key(|a| a.smoothness())
            .expect("layer present");
        Err(Error::UnsupportedDerivative(format!(
            "atom '{}' is {:?} and cannot supply order-{order} input derivatives",
            worst.name(),
            worst.smoothness()
        )))
    }

    /// Evaluate at one point with input derivatives up to `order`.
    pub fn eval_point(&self, x: &[F], order: usize) -> Result<PointEval<F>> {
        self.check_derivative_order(order)?;
        let shape = self.net_shape();
        let (mut params, hash_tables) = self.params_view();
        if !hash_tables.is_empty() {
            params.enc.hash_tables = Some(&hash_tables);
        }
        Ok(eval_generic(&shape, &params, x, order))
    }

    /// Laplacian of each output channel (sum of pure second derivatives).
    pub fn laplacian(&self, x: &[F]) -> Result<Vec<F>> {
        let d = x.len();
        let e = self.eval_point(x, 2)?;
        Ok((0..self.out_dim())
            .map(|c| (0..d).map(|a| e.hess_diag[c * d + a]).sum())
            .collect())
    }

    fn chunk_forward(&self, xs_chunk: &Matrix<F>, keep_trace: bool) -> ChunkTrace<F> {
        let n = xs_chunk.rows();
        let e = self.encoder.out_dim();
        let mut enc = Matrix::zeros(n, e);
        for i in 0..n {
            self.encoder.encode_into(xs_chunk.row(i), enc.row_mut(i));
        }
        let mut act = Vec::with_capacity(self.net.layers.len());
        let mut d1 = Vec::with_capacity(self.net.layers.len());
        let mut h = enc.clone();
        for layer in &self.net.layers {
            // u = omega * (h W^T + b)
            let mut u = h.mul_tr(&layer.w);
            let om = F::c(layer.omega);
            for i in 0..n {
                for (uv, &bv) in u.row_mut(i).iter_mut().zip(&layer.b) {
                    *uv = om * (*uv + bv);
                }
            }
            let mut a = Matrix::zeros(n, layer.w.rows());
            let mut g = Matrix::zeros(n, layer.w.rows());
            for ((uv, av), gv) in
                u.data().iter().zip(a.data_mut().iter_mut()).zip(g.data_mut().iter_mut())
            {
                let (v, dv) = layer.atom.value_d1(*uv);
                *av = v;
                *gv = dv;
            }
            h = a.clone();
            if keep_trace {
                act.push(a);
                d1.push(g);
            }
        }
        let mut out = h.mul_tr(&self.net.out_w);
        for i in 0..n {
            for (ov, &bv) in out.row_mut(i).iter_mut().zip(&self.net.out_b) {
                *ov += bv;
            }
        }
        ChunkTrace {
            xs: if keep_trace { xs_chunk.clone() } else { Matrix::zeros(0, 0) },
            enc: if keep_trace { enc } else { Matrix::zeros(0, 0) },
            act,
            d1,
            out,
        }
    }

    fn split_rows(xs: &Matrix<F>) -> Vec<Matrix<F>> {
        let n = xs.rows();
        let d = xs.cols();
        (0..n.div_ceil(CHUNK_ROWS))
            .map(|c| {
                let lo = c * CHUNK_ROWS;
                let hi = (lo + CHUNK_ROWS).min(n);
                Matrix::from_fn(hi - lo, d, |i, j| xs[(lo + i, j)])
            })
            .collect()
    }

    /// Batched forward pass; `xs` is n x d, the result n x c.
    pub fn forward_batch(&self, xs: &Matrix<F>) -> Matrix<F> {
        let chunks = Self::split_rows(xs);
        let outs: Vec<ChunkTrace<F>> = chunks
            .par_iter()
            .map(|ch| self.chunk_forward(ch, false))
            .collect();
        let c = self.out_dim();
        let mut out = Matrix::zeros(xs.rows(), c);
        let mut r = 0;
        for ch in &outs {
            for i in 0..ch.out.rows() {
                out.row_mut(r).copy_from_slice(ch.out.row(i));
                r += 1;
            }
        }
        out
    }

    /// Batched forward pass retaining what `backward` needs.
    pub fn forward_trace(&self, xs: &Matrix<F>) -> Trace<F> {
        let chunks = Self::split_rows(xs);
        let traced: Vec<ChunkTrace<F>> = chunks
            .par_iter()
            .map(|ch| self.chunk_forward(ch, true))
            .collect();
        Trace { chunks: traced, rows: xs.rows() }
    }

    /// Backpropagate parameter gradients from per-chunk output adjoints
    /// (`dout[k]` pairs with `trace.chunks[k]`). Chunks are processed in
    /// parallel and reduced in chunk order.
    pub fn backward(&self, trace: &Trace<F>, dout: &[Matrix<F>]) -> Gradients<F> {
        assert_eq!(trace.chunks.len(), dout.len());
        let per_chunk: Vec<Gradients<F>> = trace
            .chunks
            .par_iter()
            .zip(dout.par_iter())
            .map(|(ch, g)| self.backward_chunk(ch, g))
            .collect();
        let mut total = Gradients::zeros_like(self);
        for g in &per_chunk {
            total.add_in_place(g);
        }
        total
    }

    fn backward_chunk(&self, ch: &ChunkTrace<F>, dout: &Matrix<F>) -> Gradients<F> {
        let mut grads = Gradients::zeros_like(self);
        let n = dout.rows();
        let nl = self.net.layers.len();

        let last_h = if nl == 0 { &ch.enc } else { &ch.act[nl - 1] };
        grads.out_w = dout.tr_mul(last_h);
        grads.out_b = dout.col_sums();
        let mut dh = dout.mul(&self.net.out_w);

        for l in (0..nl).rev() {
            let layer = &self.net.layers[l];
            let om = F::c(layer.omega);
            // d L / d u, with the frequency scale folded in.
            let mut du = dh;
            for (duv, d1v) in du.data_mut().iter_mut().zip(ch.d1[l].data()) {
                *duv *= om * *d1v;
            }
            let h_in = if l == 0 { &ch.enc } else { &ch.act[l - 1] };
            grads.layers[l].0 = du.tr_mul(h_in);
            grads.layers[l].1 = du.col_sums();
            dh = du.mul(&layer.w);
        }

        // dh is now d L / d enc.
        match &self.encoder {
            Encoder::Identity { .. } => {}
            Encoder::Fourier(f) => {
                if f.trainable {
                    let m = f.b.rows();
                    let d = f.b.cols();
                    let tau = F::TAU();
                    for s in 0..n {
                        let enc = ch.enc.row(s);
                        let x = ch.xs.row(s);
                        let g = dh.row(s);
                        for i in 0..m {
                            let (cos_i, sin_i) = (enc[i], enc[m + i]);
                            let coeff = tau * (g[m + i] * cos_i - g[i] * sin_i);
                            for (j, &xj) in x.iter().enumerate() {
                                grads.encoder[i * d + j] += coeff * xj;
                            }
                        }
                    }
                }
            }
            Encoder::Hash(hg) => {
                let nf = hg.features;
                let block = hg.table_size * nf;
                for s in 0..n {
                    let x = ch.xs.row(s);
                    let g = dh.row(s);
                    let xp: Vec<f64> = x.iter().map(|v| v.primal()).collect();
                    for level in 0..hg.tables.len() {
                        let res = hg.resolution(level);
                        let cell = cell_of(res, hg.dim, &xp);
                        for corner in 0..(1usize << hg.dim) {
                            let mut w = 1.0;
                            let mut v = [0u32; 3];
                            for a in 0..hg.dim {
                                let bit = (corner >> a) & 1;
                                v[a] = cell.0[a] + bit as u32;
                                w *= if bit == 1 { cell.1[a] } else { 1.0 - cell.1[a] };
                            }
                            let idx = crate::encoding::vertex_index(
                                &v,
                                res,
                                hg.dim,
                                hg.table_size,
                            );
                            let wf = F::c(w);
                            for f in 0..nf {
                                grads.encoder[level * block + idx * nf + f] +=
                                    wf * g[level * nf + f];
                            }
                        }
                    }
                }
            }
        }
        grads
    }

    /// Number of trainable scalars.
    pub fn param_len(&self) -> usize {
        let mut n = self.encoder.trainable_len();
        for l in &self.net.layers {
            n += l.w.rows() * l.w.cols() + l.b.len();
        }
        n + self.net.out_w.rows() * self.net.out_w.cols() + self.net.out_b.len()
    }

    /// Flatten trainable parameters in the shared order.
    pub fn write_params(&self, out: &mut Vec<F>) {
        out.clear();
        match &self.encoder {
            Encoder::Identity { .. } => {}
            Encoder::Fourier(f) => {
                if f.trainable {
                    out.extend_from_slice(f.b.data());
                }
            }
            Encoder::Hash(h) => {
                for t in &h.tables {
                    out.extend_from_slice(t.data());
                }
            }
        }
        for l in &self.net.layers {
            out.extend_from_slice(l.w.data());
            out.extend_from_slice(&l.b);
        }
        out.extend_from_slice(self.net.out_w.data());
        out.extend_from_slice(&self.net.out_b);
    }

    /// Load trainable parameters from the shared flat order.
    pub fn read_params(&mut self, src: &[F]) {
        assert_eq!(src.len(), self.param_len(), "parameter length mismatch");
        let mut pos = 0;
        let mut take = |n: usize| {
            let s = &src[pos..pos + n];
            pos += n;
            s
        };
        match &mut self.encoder {
            Encoder::Identity { .. } => {}
            Encoder::Fourier(f) => {
                if f.trainable {
                    let n = f.b.rows() * f.b.cols();
                    f.b.data_mut().copy_from_slice(take(n));
                }
            }
            Encoder::Hash(h) => {
                for t in &mut h.tables {
                    let n = t.rows() * t.cols();
                    t.data_mut().copy_from_slice(take(n));
                }
            }
        }
        for l in &mut self.net.layers {
            let nw = l.w.rows() * l.w.cols();
            l.w.data_mut().copy_from_slice(take(nw));
            let nb = l.b.len();
            l.b.copy_from_slice(take(nb));
        }
        let nw = self.net.out_w.rows() * self.net.out_w.cols();
        self.net.out_w.data_mut().copy_from_slice(take(nw));
        let nb = self.net.out_b.len();
        self.net.out_b.copy_from_slice(take(nb));
    }
}

/// Cell index and fractional offset of `x` on a lattice of resolution `n`.
fn cell_of(n: u32, dim: usize, xp: &[f64]) -> ([u32; 3], [f64; 3]) {
    let mut cell = [0u32; 3];
    let mut frac = [0.0f64; 3];
    for a in 0..dim {
        let pos = (xp[a] + 1.0) * 0.5 * n as f64;
        let c = pos.floor().clamp(0.0, (n - 1) as f64);
        cell[a] = c as u32;
        frac[a] = pos - c;
    }
    (cell, frac)
}
