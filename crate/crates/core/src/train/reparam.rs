//! Training hidden layers through a fixed-basis factorization.
//!
//! Each hidden weight matrix is expressed as `W = lambda * basis`, where
//! `basis` rows are discrete cosines at log-spaced frequencies (1 to
//! n_in/2 cycles across the fan-in index) with random phases, normalized
//! to unit length, and only the coefficient matrix `lambda` trains. The
//! gradient map is the chain rule `d lambda = dW * basis^T`; collapsing
//! the product back to a plain weight matrix reproduces the factored
//! forward pass exactly.

use crate::error::Result;
use crate::matrix::Matrix;
use crate::model::Field;
use crate::objective::{loss_and_grad, Objective, SampledSignal};
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::signal::psnr_from_mse;
use crate::train::adam::Adam;
use crate::train::fit::{default_lr, FitConfig, TrainLog, DIVERGENCE_LIMIT};
use std::f64::consts::TAU;

#[derive(Clone, Debug, PartialEq)]
pub struct ReparamLayer<F: Scalar = f64> {
    /// Trainable coefficients, n_out x rank.
    pub lambda: Matrix<F>,
    /// Fixed unit-norm cosine rows, rank x n_in.
    pub basis: Matrix<F>,
}

impl<F: Scalar> ReparamLayer<F> {
    /// Draw a basis and matching coefficients. `w_std` sets the coefficient
    /// range so the collapsed product starts at roughly that weight scale.
    pub fn sample(n_out: usize, n_in: usize, rank: usize, w_std: f64, rng: &mut Rng) -> Self {
        assert!(rank >= 1 && n_out >= 1 && n_in >= 1);
        let lo = 1.0f64;
        let hi = (n_in as f64 / 2.0).max(1.0);
        let mut basis = Matrix::zeros(rank, n_in);
        for j in 0..rank {
            let t = if rank == 1 { 0.0 } else { j as f64 / (rank - 1) as f64 };
            let freq = lo * (hi / lo).powf(t);
            let phase = rng.uniform_in(0.0, TAU);
            let row = basis.row_mut(j);
            for (i, v) in row.iter_mut().enumerate() {
                *v = F::c((TAU * freq * i as f64 / n_in as f64 + phase).cos());
            }
            let norm = row.iter().map(|v| v.primal() * v.primal()).sum::<f64>().sqrt();
            if norm > 1e-9 {
                let inv = F::c(1.0 / norm);
                for v in row.iter_mut() {
                    *v *= inv;
                }
            } else {
                row[0] = F::one();
            }
        }
        let bound = w_std * (3.0 * n_in as f64 / rank as f64).sqrt();
        let lambda =
            Matrix::from_fn(n_out, rank, |_, _| F::c(rng.uniform_in(-bound, bound)));
        ReparamLayer { lambda, basis }
    }

    /// Materialize the plain weight matrix `lambda * basis`.
    pub fn collapse(&self) -> Matrix<F> {
        self.lambda.mul(&self.basis)
    }
}

/// Flat layout: encoder params, per layer (lambda, bias), output layer.
struct RpLayout {
    enc_len: usize,
    layers: Vec<(usize, usize, usize)>, // (n_out, n_in, rank)
    out_len: usize,
}

impl RpLayout {
    fn rp_len(&self) -> usize {
        let mid: usize = self.layers.iter().map(|&(o, _, r)| o * r + o).sum();
        self.enc_len + mid + self.out_len
    }
}

fn layout<F: Scalar>(field: &Field<F>, rank: usize) -> RpLayout {
    RpLayout {
        enc_len: field.encoder.trainable_len(),
        layers: field
            .net
            .layers
            .iter()
            .map(|l| (l.w.rows(), l.w.cols(), rank))
            .collect(),
        out_len: field.net.out_w.rows() * field.net.out_w.cols() + field.net.out_b.len(),
    }
}

/// Expand factored parameters into the field's standard flat layout.
fn scatter<F: Scalar>(
    rp: &[F],
    lay: &RpLayout,
    bases: &[Matrix<F>],
    std_flat: &mut Vec<F>,
) {
    std_flat.clear();
    std_flat.extend_from_slice(&rp[..lay.enc_len]);
    let mut pos = lay.enc_len;
    for (k, &(n_out, _, rank)) in lay.layers.iter().enumerate() {
        let lambda = Matrix::from_vec(n_out, rank, rp[pos..pos + n_out * rank].to_vec());
        pos += n_out * rank;
        let w = lambda.mul(&bases[k]);
        std_flat.extend_from_slice(w.data());
        std_flat.extend_from_slice(&rp[pos..pos + n_out]);
        pos += n_out;
    }
    std_flat.extend_from_slice(&rp[pos..pos + lay.out_len]);
}

/// Map a standard-layout gradient into the factored layout.
fn gather_grad<F: Scalar>(grad_std: &[F], lay: &RpLayout, bases: &[Matrix<F>]) -> Vec<F> {
    let mut rp = Vec::with_capacity(lay.rp_len());
    rp.extend_from_slice(&grad_std[..lay.enc_len]);
    let mut pos = lay.enc_len;
    for (k, &(n_out, n_in, _)) in lay.layers.iter().enumerate() {
        let dw = Matrix::from_vec(n_out, n_in, grad_std[pos..pos + n_out * n_in].to_vec());
        pos += n_out * n_in;
        let dl = dw.mul_tr(&bases[k]);
        rp.extend_from_slice(dl.data());
        rp.extend_from_slice(&grad_std[pos..pos + n_out]);
        pos += n_out;
    }
    rp.extend_from_slice(&grad_std[pos..pos + lay.out_len]);
    rp
}

/// Fit with every hidden weight matrix factored at the given rank.
///
/// Hidden weights are re-drawn through the factorization (scaled to match
/// each layer's existing weight spread); biases, the output layer, and any
/// trainable encoder parameters train as usual. Returns the log and the
/// final factors; the field itself holds the collapsed weights.
pub fn fit_reparam<F: Scalar>(
    field: &mut Field<F>,
    rank: usize,
    data: &SampledSignal<F>,
    obj: &Objective,
    cfg: &FitConfig,
) -> Result<(TrainLog, Vec<ReparamLayer<F>>)> {
    obj.validate(data)?;
    field.check_derivative_order(obj.required_order())?;
    let mut rng = Rng::new(cfg.seed);
    let lay = layout(field, rank);

    let mut factors = Vec::with_capacity(field.net.layers.len());
    for l in &field.net.layers {
        let count = (l.w.rows() * l.w.cols()) as f64;
        let mean = l.w.data().iter().map(|v| v.primal()).sum::<f64>() / count;
        let w_std = (l.w.data().iter().map(|v| (v.primal() - mean).powi(2)).sum::<f64>()
            / count)
            .sqrt()
            .max(1e-6);
        factors.push(ReparamLayer::sample(l.w.rows(), l.w.cols(), rank, w_std, &mut rng));
    }
    let bases: Vec<Matrix<F>> = factors.iter().map(|f| f.basis.clone()).collect();

    // Assemble the factored parameter vector from the field's current
    // non-weight parameters and the sampled coefficients.
    let mut std_flat = Vec::new();
    field.write_params(&mut std_flat);
    let mut rp = Vec::with_capacity(lay.rp_len());
    rp.extend_from_slice(&std_flat[..lay.enc_len]);
    let mut pos = lay.enc_len;
    for (k, &(n_out, n_in, _)) in lay.layers.iter().enumerate() {
        rp.extend_from_slice(factors[k].lambda.data());
        pos += n_out * n_in;
        rp.extend_from_slice(&std_flat[pos..pos + n_out]);
        pos += n_out;
    }
    rp.extend_from_slice(&std_flat[pos..pos + lay.out_len]);

    scatter(&rp, &lay, &bases, &mut std_flat);
    field.read_params(&std_flat);

    let lr = cfg.lr.unwrap_or_else(|| default_lr(field));
    let mut adam: Adam<F> = Adam::new(lay.rp_len(), lr);
    let mut log = TrainLog::default();
    let n = data.len();
    let batch = cfg.batch_size.map(|b| b.max(1).min(n));
    let mut last_good = rp.clone();

    for step in 0..cfg.steps {
        let step_data;
        let batch_ref = match batch {
            None => data,
            Some(b) => {
                let idx: Vec<usize> =
                    (0..b).map(|_| ((rng.uniform() * n as f64) as usize).min(n - 1)).collect();
                step_data = data.subsample(&idx);
                &step_data
            }
        };
        let (loss, grad_std) = loss_and_grad(field, batch_ref, obj)?;
        if !loss.is_finite() || loss > DIVERGENCE_LIMIT {
            scatter(&last_good, &lay, &bases, &mut std_flat);
            field.read_params(&std_flat);
            rp.copy_from_slice(&last_good);
            log.diverged = true;
            break;
        }
        log.loss.push(loss);
        last_good.copy_from_slice(&rp);
        let grad_rp = gather_grad(&grad_std, &lay, &bases);
        if adam.step(&mut rp, &grad_rp).is_err() {
            scatter(&last_good, &lay, &bases, &mut std_flat);
            field.read_params(&std_flat);
            rp.copy_from_slice(&last_good);
            log.diverged = true;
            break;
        }
        scatter(&rp, &lay, &bases, &mut std_flat);
        field.read_params(&std_flat);
        if data.grid.is_some() && (step + 1) % cfg.psnr_every.max(1) == 0 {
            let mse = crate::objective::value_mse(field, &data.xs, &data.ys);
            log.psnr.push((step + 1, psnr_from_mse(mse)));
        }
    }

    // Hand back the trained coefficients alongside the collapsed field.
    let mut pos = lay.enc_len;
    for (k, &(n_out, _, rk)) in lay.layers.iter().enumerate() {
        factors[k].lambda =
            Matrix::from_vec(n_out, rk, rp[pos..pos + n_out * rk].to_vec());
        pos += n_out * rk + n_out;
    }
    Ok((log, factors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::Atom;
    use crate::encoding::EncoderSpec;
    use crate::init::{build_field, InitScheme};
    use crate::model::{FieldSpec, LayerSpec};
    use crate::objective::loss_only;
    use crate::signal::sample;

    #[test]
    fn zero_coefficients_collapse_to_zero_weights() {
        let mut rng = Rng::new(1);
        let mut rl: ReparamLayer = ReparamLayer::sample(4, 6, 3, 0.5, &mut rng);
        rl.lambda.fill(0.0);
        let w = rl.collapse();
        assert!(w.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn orthonormal_basis_with_transposed_coefficients_collapses_to_identity() {
        let n = 8;
        // Orthonormal cosine rows.
        let basis = Matrix::from_fn(n, n, |j, i| {
            let c = if j == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            c * (std::f64::consts::PI * (2.0 * i as f64 + 1.0) * j as f64 / (2.0 * n as f64))
                .cos()
        });
        let rl = ReparamLayer { lambda: basis.transpose(), basis };
        let w = rl.collapse();
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((w[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    /// Applying the collapsed matrix must equal applying the factors in
    /// sequence, to near machine precision.
    #[test]
    fn collapsed_forward_matches_factored_forward() {
        let mut rng = Rng::new(2);
        let rl: ReparamLayer = ReparamLayer::sample(6, 5, 4, 0.8, &mut rng);
        let w = rl.collapse();
        for _ in 0..1000 {
            let h = Matrix::from_fn(1, 5, |_, _| rng.uniform_in(-1.0, 1.0));
            let direct = h.mul_tr(&w);
            let staged = h.mul_tr(&rl.basis).mul_tr(&rl.lambda);
            for j in 0..6 {
                assert!((direct[(0, j)] - staged[(0, j)]).abs() <= 1e-12);
            }
        }
    }

    fn toy_setup() -> (Field<f64>, SampledSignal<f64>) {
        let spec = FieldSpec {
            in_dim: 1,
            out_dim: 1,
            encoder: EncoderSpec::Identity,
            hidden: vec![
                LayerSpec { width: 8, atom: Atom::Gaussian { s: 1.0 } },
                LayerSpec { width: 8, atom: Atom::Gaussian { s: 1.0 } },
            ],
        };
        let field = build_field(&spec, &InitScheme::Standard, &mut Rng::new(3)).unwrap();
        let xs = sample::grid_1d::<f64>(32);
        let ys = Matrix::from_fn(32, 1, |i, _| (2.5 * xs[(i, 0)]).sin());
        (field, SampledSignal::new(xs, ys).unwrap())
    }

    /// The coefficient gradient is the weight gradient pushed through the
    /// fixed basis; verify against finite differences of the factored loss.
    #[test]
    fn coefficient_gradients_match_finite_differences() {
        let (mut field, data) = toy_setup();
        let rank = 4;
        let lay = layout(&field, rank);
        let mut rng = Rng::new(4);
        let factors: Vec<ReparamLayer<f64>> = field
            .net
            .layers
            .iter()
            .map(|l| ReparamLayer::sample(l.w.rows(), l.w.cols(), rank, 0.4, &mut rng))
            .collect();
        let bases: Vec<Matrix<f64>> = factors.iter().map(|f| f.basis.clone()).collect();
        let mut std_flat = Vec::new();
        field.write_params(&mut std_flat);
        let mut rp = Vec::new();
        rp.extend_from_slice(&std_flat[..lay.enc_len]);
        let mut pos = lay.enc_len;
        for (k, &(n_out, n_in, _)) in lay.layers.iter().enumerate() {
            rp.extend_from_slice(factors[k].lambda.data());
            pos += n_out * n_in;
            rp.extend_from_slice(&std_flat[pos..pos + n_out]);
            pos += n_out;
        }
        rp.extend_from_slice(&std_flat[pos..]);

        let obj = Objective::value();
        let loss_of = |rp: &[f64], field: &mut Field<f64>, buf: &mut Vec<f64>| {
            scatter(rp, &lay, &bases, buf);
            field.read_params(buf);
            loss_only(field, &data, &obj).unwrap()
        };
        let mut buf = Vec::new();
        scatter(&rp, &lay, &bases, &mut buf);
        field.read_params(&buf);
        let (_, grad_std) = loss_and_grad(&field, &data, &obj).unwrap();
        let grad_rp = gather_grad(&grad_std, &lay, &bases);
        let eps = 1e-6;
        for i in (0..rp.len()).step_by(5) {
            let keep = rp[i];
            rp[i] = keep + eps;
            let lp = loss_of(&rp, &mut field, &mut buf);
            rp[i] = keep - eps;
            let lm = loss_of(&rp, &mut field, &mut buf);
            rp[i] = keep;
            let fd = (lp - lm) / (2.0 * eps);
            let scale = fd.abs().max(grad_rp[i].abs()).max(1e-3);
            assert!(
                (fd - grad_rp[i]).abs() <= 1e-5 * scale,
                "param {i}: fd {fd} vs {}",
                grad_rp[i]
            );
        }
    }

    #[test]
    fn factored_training_reduces_the_loss() {
        let (mut field, data) = toy_setup();
        let cfg = FitConfig { steps: 200, lr: Some(1e-2), seed: 5, ..FitConfig::default() };
        let (log, factors) = fit_reparam(&mut field, 4, &data, &Objective::value(), &cfg).unwrap();
        assert!(!log.diverged);
        assert!(log.loss.last().unwrap() < &(log.loss[0] * 0.5));
        // The returned factors collapse to the field's final weights.
        for (f, l) in factors.iter().zip(&field.net.layers) {
            let w = f.collapse();
            for (a, b) in w.data().iter().zip(l.w.data()) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
