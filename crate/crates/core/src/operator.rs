//! Linear forward operators and regularizers for fitting through indirect
//! measurements.
//!
//! An operator maps dense grid samples of the field to a measurement
//! vector: identity, binary masking, zero-padded convolution (applied
//! separably on 2D grids), or mean-pool downsampling. All four are linear,
//! so the objective gradient flows through them exactly via the adjoint.
//!
//! [`measurement_loss_and_grad`] composes mean-squared error on the
//! measurements with optional regularizers: `weight-decay` penalizes the
//! squared norm of every trainable parameter; `tv` penalizes the L1 norm
//! of forward differences of the field's outputs on the evaluation grid
//! (anisotropic total variation), with the weight applied outside the sum.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::Field;
use crate::scalar::Scalar;
use crate::signal::sample::GridShape;

#[derive(Clone, Debug, PartialEq)]
pub enum ForwardOperator {
    Identity,
    /// Keeps samples whose flag is set, in sample order.
    Mask(Vec<bool>),
    /// Odd-length kernel, zero padding; on 2D grids applied along x then y.
    Conv(Vec<f64>),
    /// Block mean pooling by an integer factor along every axis.
    Downsample(usize),
}

impl ForwardOperator {
    pub fn name(&self) -> &'static str {
        match self {
            ForwardOperator::Identity => "identity",
            ForwardOperator::Mask(_) => "mask",
            ForwardOperator::Conv(_) => "conv",
            ForwardOperator::Downsample(_) => "downsample",
        }
    }

    pub fn validate(&self, grid: GridShape) -> Result<()> {
        match self {
            ForwardOperator::Identity => Ok(()),
            ForwardOperator::Mask(m) => {
                if m.len() != grid.len() {
                    return Err(Error::Incompatible(format!(
                        "mask of {} vs grid of {}",
                        m.len(),
                        grid.len()
                    )));
                }
                if !m.iter().any(|&k| k) {
                    return Err(Error::InvalidParam(
                        "mask keeps no samples, so the measurements impose no constraints".into(),
                    ));
                }
                Ok(())
            }
            ForwardOperator::Conv(k) => {
                if k.is_empty() || k.len() % 2 == 0 {
                    return Err(Error::InvalidParam("conv kernel length must be odd".into()));
                }
                if k.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParam("conv kernel must be finite".into()));
                }
                Ok(())
            }
            ForwardOperator::Downsample(f) => {
                if *f == 0 {
                    return Err(Error::InvalidParam("downsample factor must be >= 1".into()));
                }
                let divides = match grid {
                    GridShape::One(n) => n % f == 0,
                    GridShape::Two(w, h) => w % f == 0 && h % f == 0,
                };
                if !divides {
                    return Err(Error::Incompatible(format!(
                        "downsample factor {f} does not divide the grid dims"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn out_len(&self, grid: GridShape) -> usize {
        match self {
            ForwardOperator::Identity | ForwardOperator::Conv(_) => grid.len(),
            ForwardOperator::Mask(m) => m.iter().filter(|&&k| k).count(),
            ForwardOperator::Downsample(f) => match grid {
                GridShape::One(n) => n / f,
                GridShape::Two(w, h) => (w / f) * (h / f),
            },
        }
    }

    /// Apply to per-sample values (n x c), yielding measurements (m x c).
    pub fn apply<F: Scalar>(&self, values: &Matrix<F>, grid: GridShape) -> Result<Matrix<F>> {
        self.validate(grid)?;
        if values.rows() != grid.len() {
            return Err(Error::Incompatible(format!(
                "{} samples vs grid of {}",
                values.rows(),
                grid.len()
            )));
        }
        let c = values.cols();
        Ok(match self {
            ForwardOperator::Identity => values.clone(),
            ForwardOperator::Mask(m) => {
                let kept: Vec<usize> =
                    m.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect();
                Matrix::from_fn(kept.len(), c, |i, j| values[(kept[i], j)])
            }
            ForwardOperator::Conv(k) => match grid {
                GridShape::One(n) => conv_axis(values, n, k),
                GridShape::Two(w, h) => {
                    let horiz = conv_rows_2d(values, w, h, k);
                    conv_cols_2d(&horiz, w, h, k)
                }
            },
            ForwardOperator::Downsample(f) => match grid {
                GridShape::One(n) => {
                    let m = n / f;
                    let inv = F::c(1.0 / *f as f64);
                    Matrix::from_fn(m, c, |i, j| {
                        let mut acc = F::zero();
                        for t in 0..*f {
                            acc += values[(i * f + t, j)];
                        }
                        acc * inv
                    })
                }
                GridShape::Two(w, h) => {
                    let (mw, mh) = (w / f, h / f);
                    let inv = F::c(1.0 / (f * f) as f64);
                    Matrix::from_fn(mw * mh, c, |i, j| {
                        let (bx, by) = (i % mw, i / mw);
                        let mut acc = F::zero();
                        for dy in 0..*f {
                            for dx in 0..*f {
                                acc += values[((by * f + dy) * w + bx * f + dx, j)];
                            }
                        }
                        acc * inv
                    })
                }
            },
        })
    }

    /// Adjoint map: measurement-space adjoints (m x c) back to sample
    /// space (n x c). Satisfies <A u, v> = <u, A' v>.
    pub fn adjoint<F: Scalar>(&self, meas: &Matrix<F>, grid: GridShape) -> Result<Matrix<F>> {
        self.validate(grid)?;
        if meas.rows() != self.out_len(grid) {
            return Err(Error::Incompatible(format!(
                "{} measurement rows vs expected {}",
                meas.rows(),
                self.out_len(grid)
            )));
        }
        let c = meas.cols();
        Ok(match self {
            ForwardOperator::Identity => meas.clone(),
            ForwardOperator::Mask(m) => {
                let mut out = Matrix::zeros(grid.len(), c);
                let mut r = 0;
                for (i, &keep) in m.iter().enumerate() {
                    if keep {
                        out.row_mut(i).copy_from_slice(meas.row(r));
                        r += 1;
                    }
                }
                out
            }
            ForwardOperator::Conv(k) => {
                // Adjoint of zero-padded convolution is correlation, i.e.
                // convolution with the reversed kernel.
                let rev: Vec<f64> = k.iter().rev().copied().collect();
                match grid {
                    GridShape::One(n) => conv_axis(meas, n, &rev),
                    GridShape::Two(w, h) => {
                        let vert = conv_cols_2d(meas, w, h, &rev);
                        conv_rows_2d(&vert, w, h, &rev)
                    }
                }
            }
            ForwardOperator::Downsample(f) => match grid {
                GridShape::One(n) => {
                    let inv = F::c(1.0 / *f as f64);
                    Matrix::from_fn(n, c, |i, j| meas[(i / f, j)] * inv)
                }
                GridShape::Two(w, h) => {
                    let mw = w / f;
                    let inv = F::c(1.0 / (f * f) as f64);
                    Matrix::from_fn(w * h, c, |i, j| {
                        let (x, y) = (i % w, i / w);
                        meas[((y / f) * mw + x / f, j)] * inv
                    })
                }
            },
        })
    }
}

/// 1D convolution over an n-sample axis, all channels.
fn conv_axis<F: Scalar>(values: &Matrix<F>, count: usize, kernel: &[f64]) -> Matrix<F> {
    let c = values.cols();
    let r = (kernel.len() - 1) / 2;
    Matrix::from_fn(count, c, |i, ch| {
        let mut acc = F::zero();
        for (j, &kj) in kernel.iter().enumerate() {
            let t = i as isize + r as isize - j as isize;
            if t >= 0 && (t as usize) < count {
                acc += values[(t as usize, ch)] * F::c(kj);
            }
        }
        acc
    })
}

/// Convolve each image row (along x), all channels.
fn conv_rows_2d<F: Scalar>(values: &Matrix<F>, w: usize, h: usize, kernel: &[f64]) -> Matrix<F> {
    let c = values.cols();
    let r = (kernel.len() - 1) / 2;
    Matrix::from_fn(w * h, c, |i, ch| {
        let (x, y) = (i % w, i / w);
        let mut acc = F::zero();
        for (j, &kj) in kernel.iter().enumerate() {
            let t = x as isize + r as isize - j as isize;
            if t >= 0 && (t as usize) < w {
                acc += values[(y * w + t as usize, ch)] * F::c(kj);
            }
        }
        acc
    })
}

/// Convolve each image column (along y), all channels.
fn conv_cols_2d<F: Scalar>(values: &Matrix<F>, w: usize, h: usize, kernel: &[f64]) -> Matrix<F> {
    let c = values.cols();
    let r = (kernel.len() - 1) / 2;
    Matrix::from_fn(w * h, c, |i, ch| {
        let (x, y) = (i % w, i / w);
        let mut acc = F::zero();
        for (j, &kj) in kernel.iter().enumerate() {
            let t = y as isize + r as isize - j as isize;
            if t >= 0 && (t as usize) < h {
                acc += values[(t as usize * w + x, ch)] * F::c(kj);
            }
        }
        acc
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Regularizer {
    /// lambda * sum of squared trainable parameters.
    WeightDecay { lambda: f64 },
    /// lambda * L1 norm of forward differences of the field outputs on the
    /// evaluation grid, per axis and channel.
    Tv { lambda: f64 },
}

impl Regularizer {
    pub fn validate(&self) -> Result<()> {
        let lambda = match self {
            Regularizer::WeightDecay { lambda } | Regularizer::Tv { lambda } => *lambda,
        };
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParam("regularizer weight must be >= 0".into()));
        }
        Ok(())
    }
}

/// Total variation of grid outputs and its subgradient (sign of each
/// difference, with sign(0) = 0), accumulated into `dout`.
fn tv_value_and_grad<F: Scalar>(
    out: &Matrix<F>,
    grid: GridShape,
    lambda: f64,
    dout: &mut Matrix<F>,
) -> f64 {
    let lam = F::c(lambda);
    let mut total = 0.0;
    let mut edge = |a: usize, b: usize, ch: usize, dout: &mut Matrix<F>| {
        let d = (out[(b, ch)] - out[(a, ch)]).primal();
        total += d.abs();
        let s = if d > 0.0 {
            F::one()
        } else if d < 0.0 {
            -F::one()
        } else {
            F::zero()
        };
        dout[(b, ch)] += lam * s;
        dout[(a, ch)] -= lam * s;
    };
    for ch in 0..out.cols() {
        match grid {
            GridShape::One(n) => {
                for i in 0..n.saturating_sub(1) {
                    edge(i, i + 1, ch, dout);
                }
            }
            GridShape::Two(w, h) => {
                for y in 0..h {
                    for x in 0..w - 1 {
                        edge(y * w + x, y * w + x + 1, ch, dout);
                    }
                }
                for y in 0..h - 1 {
                    for x in 0..w {
                        edge(y * w + x, (y + 1) * w + x, ch, dout);
                    }
                }
            }
        }
    }
    lambda * total
}

/// Mean-squared error on operator measurements plus regularizers, with the
/// gradient over the flat trainable parameters.
///
/// `xs` are the dense evaluation-grid coordinates (matching `grid`), and
/// `measurements` has `op.out_len(grid)` rows. The loss is
/// `(1/m) * sum |A f(xs) - y|^2 + sum_j R_j`.
pub fn measurement_loss_and_grad<F: Scalar>(
    field: &Field<F>,
    xs: &Matrix<F>,
    grid: GridShape,
    op: &ForwardOperator,
    measurements: &Matrix<F>,
    regs: &[Regularizer],
) -> Result<(f64, Vec<F>)> {
    op.validate(grid)?;
    for r in regs {
        r.validate()?;
    }
    if xs.rows() != grid.len() {
        return Err(Error::Incompatible(format!(
            "{} coordinates vs grid of {}",
            xs.rows(),
            grid.len()
        )));
    }
    let m = op.out_len(grid);
    if measurements.rows() != m || measurements.cols() != field.out_dim() {
        return Err(Error::Incompatible(format!(
            "measurements are {}x{}, expected {}x{}",
            measurements.rows(),
            measurements.cols(),
            m,
            field.out_dim()
        )));
    }

    let trace = field.forward_trace(xs);
    let out = trace.outputs();
    let pred = op.apply(&out, grid)?;
    let mut loss = 0.0;
    let scale = F::c(2.0 / m as f64);
    let mut dmeas = Matrix::zeros(pred.rows(), pred.cols());
    for i in 0..pred.rows() {
        for j in 0..pred.cols() {
            let r = pred[(i, j)] - measurements[(i, j)];
            loss += r.primal() * r.primal();
            dmeas[(i, j)] = scale * r;
        }
    }
    loss /= m as f64;
    let mut dout = op.adjoint(&dmeas, grid)?;

    for reg in regs {
        if let Regularizer::Tv { lambda } = reg {
            loss += tv_value_and_grad(&out, grid, *lambda, &mut dout);
        }
    }

    let douts = split_like_trace(&dout, &trace);
    let grads = field.backward(&trace, &douts);
    let mut flat = grads.flatten();

    for reg in regs {
        if let Regularizer::WeightDecay { lambda } = reg {
            let mut theta = Vec::new();
            field.write_params(&mut theta);
            let lam = F::c(*lambda);
            let two = F::c(2.0);
            for (g, &p) in flat.iter_mut().zip(&theta) {
                loss += lambda * p.primal() * p.primal();
                *g += two * lam * p;
            }
        }
    }

    Ok((loss, flat))
}

fn split_like_trace<F: Scalar>(dout: &Matrix<F>, trace: &crate::model::Trace<F>) -> Vec<Matrix<F>> {
    let mut parts = Vec::with_capacity(trace.chunks.len());
    let mut row0 = 0;
    for ch in &trace.chunks {
        let rows = ch.out.rows();
        parts.push(Matrix::from_fn(rows, dout.cols(), |i, j| dout[(row0 + i, j)]));
        row0 += rows;
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::Atom;
    use crate::encoding::EncoderSpec;
    use crate::init::{build_field, InitScheme};
    use crate::model::{FieldSpec, LayerSpec};
    use crate::objective::{loss_and_grad, Objective, SampledSignal};
    use crate::rng::Rng;
    use crate::signal::sample;

    fn rand_values(n: usize, c: usize, seed: u64) -> Matrix<f64> {
        let mut rng = Rng::new(seed);
        Matrix::from_fn(n, c, |_, _| rng.uniform_in(-1.0, 1.0))
    }

    fn ops_under_test() -> Vec<(ForwardOperator, GridShape)> {
        let mut rng = Rng::new(88);
        let mask: Vec<bool> = (0..24).map(|_| rng.uniform() < 0.5).collect();
        vec![
            (ForwardOperator::Identity, GridShape::One(24)),
            (ForwardOperator::Mask(mask), GridShape::One(24)),
            (ForwardOperator::Conv(vec![0.25, 0.5, 0.25]), GridShape::One(24)),
            (ForwardOperator::Conv(vec![-1.0, 2.0, 0.5]), GridShape::Two(6, 4)),
            (ForwardOperator::Downsample(2), GridShape::One(24)),
            (ForwardOperator::Downsample(2), GridShape::Two(6, 4)),
        ]
    }

    #[test]
    fn operators_are_linear() {
        for (op, grid) in ops_under_test() {
            let u = rand_values(grid.len(), 2, 1);
            let v = rand_values(grid.len(), 2, 2);
            let (a, b) = (0.7, -1.3);
            let mut combo = u.clone();
            for (x, (&uu, &vv)) in
                combo.data_mut().iter_mut().zip(u.data().iter().zip(v.data()))
            {
                *x = a * uu + b * vv;
            }
            let lhs = op.apply(&combo, grid).unwrap();
            let au = op.apply(&u, grid).unwrap();
            let av = op.apply(&v, grid).unwrap();
            for i in 0..lhs.rows() {
                for j in 0..lhs.cols() {
                    assert!(
                        (lhs[(i, j)] - (a * au[(i, j)] + b * av[(i, j)])).abs() <= 1e-12,
                        "{} not linear",
                        op.name()
                    );
                }
            }
        }
    }

    #[test]
    fn adjoint_satisfies_inner_product_identity() {
        for (op, grid) in ops_under_test() {
            let u = rand_values(grid.len(), 1, 3);
            let v = rand_values(op.out_len(grid), 1, 4);
            let au = op.apply(&u, grid).unwrap();
            let atv = op.adjoint(&v, grid).unwrap();
            let lhs: f64 = au.data().iter().zip(v.data()).map(|(a, b)| a * b).sum();
            let rhs: f64 = u.data().iter().zip(atv.data()).map(|(a, b)| a * b).sum();
            assert!((lhs - rhs).abs() < 1e-12, "{}: {lhs} vs {rhs}", op.name());
        }
    }

    #[test]
    fn delta_kernel_is_identity() {
        let v = rand_values(10, 2, 5);
        let out = ForwardOperator::Conv(vec![0.0, 1.0, 0.0])
            .apply(&v, GridShape::One(10))
            .unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn mask_edge_cases() {
        let v = rand_values(6, 1, 6);
        let all = ForwardOperator::Mask(vec![true; 6]).apply(&v, GridShape::One(6)).unwrap();
        assert_eq!(all, v);
        let none = ForwardOperator::Mask(vec![false; 6]).apply(&v, GridShape::One(6));
        assert!(matches!(none, Err(Error::InvalidParam(_))));
    }

    #[test]
    fn downsample_preserves_constants_and_checks_divisibility() {
        let v = Matrix::from_fn(16, 1, |_, _| 0.42);
        let out = ForwardOperator::Downsample(4).apply(&v, GridShape::Two(4, 4)).unwrap();
        assert_eq!(out.rows(), 1);
        assert!(f64::abs(out[(0, 0)] - 0.42) < 1e-15);
        let bad = ForwardOperator::Downsample(3).apply(&v, GridShape::Two(4, 4));
        assert!(matches!(bad, Err(Error::Incompatible(_))));
    }

    #[test]
    fn masked_mse_matches_bruteforce_restriction() {
        let mut rng = Rng::new(77);
        let mask: Vec<bool> = (0..20).map(|_| rng.uniform() < 0.6).collect();
        let v = rand_values(20, 1, 7);
        let y = rand_values(mask.iter().filter(|&&k| k).count(), 1, 8);
        let op = ForwardOperator::Mask(mask.clone());
        let pred = op.apply(&v, GridShape::One(20)).unwrap();
        let mse: f64 = pred
            .data()
            .iter()
            .zip(y.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / y.rows() as f64;
        // Brute force over kept indices.
        let mut acc = 0.0;
        let mut r = 0;
        for (i, &keep) in mask.iter().enumerate() {
            if keep {
                acc += (v[(i, 0)] - y[(r, 0)]).powi(2);
                r += 1;
            }
        }
        acc /= y.rows() as f64;
        assert!((mse - acc).abs() < 1e-14);
    }

    fn small_field(seed: u64) -> crate::model::Field<f64> {
        let spec = FieldSpec {
            in_dim: 2,
            out_dim: 1,
            encoder: EncoderSpec::Identity,
            hidden: vec![LayerSpec { width: 6, atom: Atom::Gaussian { s: 1.0 } }],
        };
        build_field(&spec, &InitScheme::Standard, &mut Rng::new(seed)).unwrap()
    }

    #[test]
    fn identity_operator_without_regularizers_equals_value_loss() {
        let field = small_field(1);
        let grid = GridShape::Two(5, 4);
        let xs = sample::grid_2d::<f64>(5, 4);
        let y = rand_values(20, 1, 9);
        let (l1, g1) = measurement_loss_and_grad(
            &field,
            &xs,
            grid,
            &ForwardOperator::Identity,
            &y,
            &[],
        )
        .unwrap();
        let data = SampledSignal::new(xs, y).unwrap();
        let (l2, g2) = loss_and_grad(&field, &data, &Objective::value()).unwrap();
        assert!((l1 - l2).abs() < 1e-14);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn weight_decay_of_zeroed_field_contributes_nothing() {
        let mut field = small_field(2);
        let zeros = vec![0.0; field.param_len()];
        field.read_params(&zeros);
        let grid = GridShape::Two(4, 2);
        let xs = sample::grid_2d::<f64>(4, 2);
        let y = Matrix::zeros(8, 1);
        let (with, _) = measurement_loss_and_grad(
            &field,
            &xs,
            grid,
            &ForwardOperator::Identity,
            &y,
            &[Regularizer::WeightDecay { lambda: 3.0 }],
        )
        .unwrap();
        let (without, _) = measurement_loss_and_grad(
            &field,
            &xs,
            grid,
            &ForwardOperator::Identity,
            &y,
            &[],
        )
        .unwrap();
        assert!((with - without).abs() < 1e-15);
    }

    #[test]
    fn tv_of_constant_output_is_zero() {
        let mut field = small_field(3);
        // Zero the output weights: the field then outputs the constant out_b.
        let mut theta = Vec::new();
        field.write_params(&mut theta);
        let n = theta.len();
        for v in &mut theta[n - 7..n - 1] {
            *v = 0.0;
        }
        theta[n - 1] = 0.25;
        field.read_params(&theta);
        let grid = GridShape::Two(4, 4);
        let xs = sample::grid_2d::<f64>(4, 4);
        let y = rand_values(16, 1, 10);
        let (with, _) = measurement_loss_and_grad(
            &field,
            &xs,
            grid,
            &ForwardOperator::Identity,
            &y,
            &[Regularizer::Tv { lambda: 5.0 }],
        )
        .unwrap();
        let (without, _) = measurement_loss_and_grad(
            &field,
            &xs,
            grid,
            &ForwardOperator::Identity,
            &y,
            &[],
        )
        .unwrap();
        assert!((with - without).abs() < 1e-12);
    }

    /// Finite-difference check over every operator x regularizer pairing.
    #[test]
    fn composed_gradients_match_finite_differences() {
        let grid = GridShape::Two(6, 4);
        let xs = sample::grid_2d::<f64>(6, 4);
        let mut rng = Rng::new(11);
        let mask: Vec<bool> = (0..24).map(|_| rng.uniform() < 0.7).collect();
        let ops = vec![
            ForwardOperator::Identity,
            ForwardOperator::Mask(mask),
            ForwardOperator::Conv(vec![0.2, 0.6, 0.2]),
            ForwardOperator::Downsample(2),
        ];
        let reg_sets: Vec<Vec<Regularizer>> = vec![
            vec![],
            vec![Regularizer::WeightDecay { lambda: 0.05 }],
            vec![Regularizer::Tv { lambda: 0.01 }],
            vec![
                Regularizer::WeightDecay { lambda: 0.05 },
                Regularizer::Tv { lambda: 0.01 },
            ],
        ];
        for op in &ops {
            for regs in &reg_sets {
                let mut field = small_field(4);
                let y = rand_values(op.out_len(grid), 1, 12);
                let (_, grad) =
                    measurement_loss_and_grad(&field, &xs, grid, op, &y, regs).unwrap();
                let mut theta = Vec::new();
                field.write_params(&mut theta);
                let eps = 1e-6;
                for i in (0..theta.len()).step_by(7) {
                    let keep = theta[i];
                    theta[i] = keep + eps;
                    field.read_params(&theta);
                    let (lp, _) =
                        measurement_loss_and_grad(&field, &xs, grid, op, &y, regs).unwrap();
                    theta[i] = keep - eps;
                    field.read_params(&theta);
                    let (lm, _) =
                        measurement_loss_and_grad(&field, &xs, grid, op, &y, regs).unwrap();
                    theta[i] = keep;
                    field.read_params(&theta);
                    let fd = (lp - lm) / (2.0 * eps);
                    let scale = fd.abs().max(grad[i].abs()).max(1e-3);
                    assert!(
                        (fd - grad[i]).abs() <= 1e-5 * scale,
                        "{} + {:?}: param {i}: fd {fd} vs grad {}",
                        op.name(),
                        regs,
                        grad[i]
                    );
                }
            }
        }
    }
}
