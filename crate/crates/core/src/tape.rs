//! Reverse-mode automatic differentiation on scalars.
//!
//! Derivative-supervised objectives need parameter gradients of quantities
//! that are themselves derivatives (a Jacobian entry, a Laplacian). The
//! network's input-derivative propagation is ordinary arithmetic over any
//! [`Analytic`] type, so running it on tape values records that arithmetic
//! — including the activation derivative formulas — and one reverse sweep
//! yields gradients with respect to every leaf. Third derivatives of atoms
//! never need to be written down; they fall out of differentiating the
//! recorded second-derivative formulas.
//!
//! The tape is an arena of nodes, each holding at most two parent indices
//! and the local partials. [`Tv`] is a `Copy` handle (value + node index +
//! tape reference), cheap enough to flow through the same generic code as
//! plain floats.

use crate::analytic::Analytic;
use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy)]
struct Node {
    parents: [u32; 2],
    locals: [f64; 2],
}

#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Tape value: a recorded scalar.
#[derive(Clone, Copy)]
pub struct Tv<'t> {
    val: f64,
    idx: u32,
    tape: &'t Tape,
}

impl Tape {
    pub fn new() -> Tape {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drop all nodes; outstanding [`Tv`] handles from before the reset
    /// must not be used afterwards.
    pub fn reset(&mut self) {
        self.nodes.get_mut().clear();
    }

    /// Register an independent variable.
    pub fn leaf(&self, val: f64) -> Tv<'_> {
        self.push(val, [0, 0], [0.0, 0.0], true)
    }

    pub fn leaves(&self, vals: &[f64]) -> Vec<Tv<'_>> {
        vals.iter().map(|&v| self.leaf(v)).collect()
    }

    fn push(&self, val: f64, parents: [u32; 2], locals: [f64; 2], self_parent: bool) -> Tv<'_> {
        let mut nodes = self.nodes.borrow_mut();
        let idx = nodes.len() as u32;
        let parents = if self_parent { [idx, idx] } else { parents };
        nodes.push(Node { parents, locals });
        Tv { val, idx, tape: self }
    }

    /// Adjoints of every node with respect to `output`; index with
    /// [`Tv::index`]. One reverse sweep over the arena.
    pub fn gradient(&self, output: Tv<'_>) -> Vec<f64> {
        let nodes = self.nodes.borrow();
        debug_assert!(std::ptr::eq(output.tape, self), "output from another tape");
        let mut adj = vec![0.0f64; nodes.len()];
        adj[output.idx as usize] = 1.0;
        for i in (0..nodes.len()).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let n = &nodes[i];
            for k in 0..2 {
                let p = n.parents[k] as usize;
                if p != i {
                    adj[p] += a * n.locals[k];
                }
            }
        }
        adj
    }
}

impl<'t> Tv<'t> {
    pub fn value(self) -> f64 {
        self.val
    }

    pub fn index(self) -> usize {
        self.idx as usize
    }

    fn unary(self, val: f64, local: f64) -> Tv<'t> {
        self.tape.push(val, [self.idx, self.idx], [local, 0.0], false)
    }

    fn binary(self, other: Tv<'t>, val: f64, la: f64, lb: f64) -> Tv<'t> {
        debug_assert!(std::ptr::eq(self.tape, other.tape), "mixed tapes");
        self.tape.push(val, [self.idx, other.idx], [la, lb], false)
    }
}

impl<'t> Add for Tv<'t> {
    type Output = Tv<'t>;
    fn add(self, rhs: Tv<'t>) -> Tv<'t> {
        self.binary(rhs, self.val + rhs.val, 1.0, 1.0)
    }
}

impl<'t> Sub for Tv<'t> {
    type Output = Tv<'t>;
    fn sub(self, rhs: Tv<'t>) -> Tv<'t> {
        self.binary(rhs, self.val - rhs.val, 1.0, -1.0)
    }
}

impl<'t> Mul for Tv<'t> {
    type Output = Tv<'t>;
    fn mul(self, rhs: Tv<'t>) -> Tv<'t> {
        self.binary(rhs, self.val * rhs.val, rhs.val, self.val)
    }
}

impl<'t> Div for Tv<'t> {
    type Output = Tv<'t>;
    fn div(self, rhs: Tv<'t>) -> Tv<'t> {
        let inv = 1.0 / rhs.val;
        self.binary(rhs, self.val * inv, inv, -self.val * inv * inv)
    }
}

impl<'t> Neg for Tv<'t> {
    type Output = Tv<'t>;
    fn neg(self) -> Tv<'t> {
        self.unary(-self.val, -1.0)
    }
}

impl<'t> Analytic for Tv<'t> {
    fn konst(self, c: f64) -> Self {
        self.tape.push(c, [0, 0], [0.0, 0.0], true)
    }

    fn primal(self) -> f64 {
        self.val
    }

    fn sin(self) -> Self {
        self.unary(self.val.sin(), self.val.cos())
    }

    fn cos(self) -> Self {
        self.unary(self.val.cos(), -self.val.sin())
    }

    fn exp(self) -> Self {
        let e = self.val.exp();
        self.unary(e, e)
    }

    fn tanh(self) -> Self {
        let t = self.val.tanh();
        self.unary(t, 1.0 - t * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::Atom;

    #[test]
    fn gradients_of_a_mixed_expression() {
        // f(x, y) = sin(x) * y + x^2
        let tape = Tape::new();
        let x = tape.leaf(0.7);
        let y = tape.leaf(-1.3);
        let f = x.sin() * y + x.sq();
        assert!((f.value() - (0.7f64.sin() * -1.3 + 0.49)).abs() < 1e-15);
        let adj = tape.gradient(f);
        let dfdx = 0.7f64.cos() * -1.3 + 2.0 * 0.7;
        let dfdy = 0.7f64.sin();
        assert!((adj[x.index()] - dfdx).abs() < 1e-14);
        assert!((adj[y.index()] - dfdy).abs() < 1e-14);
    }

    #[test]
    fn division_and_transcendentals_match_finite_differences() {
        let f = |x: f64| (x.tanh() / (1.0 + x * x)).exp();
        let tape = Tape::new();
        for &x0 in &[0.3, -1.7, 2.1] {
            let x = tape.leaf(x0);
            let one = x.konst(1.0);
            let y = (x.tanh() / (one + x.sq())).exp();
            assert!((y.value() - f(x0)).abs() < 1e-14);
            let adj = tape.gradient(y);
            let h = 1e-6;
            let fd = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
            assert!(
                (adj[x.index()] - fd).abs() < 1e-8 * (1.0 + fd.abs()),
                "at {x0}: {} vs {fd}",
                adj[x.index()]
            );
        }
    }

    #[test]
    fn abs_and_relu_record_the_taken_branch() {
        let tape = Tape::new();
        let x = tape.leaf(-0.4);
        let y = x.abs() * x.konst(3.0);
        let adj = tape.gradient(y);
        assert_eq!(adj[x.index()], -3.0);
        let x2 = tape.leaf(-0.4);
        let z = x2.relu();
        let adj = tape.gradient(z);
        assert_eq!(adj[x2.index()], 0.0);
    }

    /// Differentiating an atom's recorded first-derivative formula must
    /// reproduce its closed-form second derivative: the two routes are
    /// independent expressions of the same function.
    #[test]
    fn taped_first_derivative_differentiates_to_second() {
        let atoms = vec![
            Atom::Sine { omega: 3.0 },
            Atom::Gaussian { s: 1.0 },
            Atom::Wire { omega: 10.0, s: 1.0 },
            Atom::Hosc { beta: 2.0, omega: 3.0 },
            Atom::Sinc { omega: std::f64::consts::PI },
            Atom::Rc {
                omega1: std::f64::consts::PI,
                omega2: std::f64::consts::FRAC_PI_2,
                s: 1.0,
            },
            Atom::Chebyshev { coeffs: vec![0.0, 1.0, 0.5, 0.25] },
        ];
        for atom in atoms {
            for &x0 in &[0.37, -1.12, 2.4, 0.03] {
                let tape = Tape::new();
                let x = tape.leaf(x0);
                let (_, d1, d2) = atom.eval(x);
                let adj = tape.gradient(d1);
                let second_via_tape = adj[x.index()];
                let second_closed = d2.value();
                assert!(
                    (second_via_tape - second_closed).abs()
                        <= 1e-9 * (1.0 + second_closed.abs()),
                    "{} at {x0}: tape {second_via_tape} vs closed {second_closed}",
                    atom.name()
                );
            }
        }
    }

    /// Full pipeline: gradient of a field's Laplacian with respect to its
    /// parameters, tape versus central finite differences of the plain
    /// evaluation path.
    #[test]
    fn laplacian_parameter_gradients_match_finite_differences() {
        use crate::encoding::{EncParams, EncoderSpec};
        use crate::init::{build_field, InitScheme};
        use crate::model::{eval_generic, FieldSpec, LayerSpec, NetParams};
        use crate::rng::Rng;

        let spec = FieldSpec {
            in_dim: 2,
            out_dim: 1,
            encoder: EncoderSpec::FourierGauss { m: 3, sigma: 1.0, trainable: true },
            hidden: vec![
                LayerSpec { width: 4, atom: Atom::Sine { omega: 1.0 } },
                LayerSpec { width: 3, atom: Atom::Gaussian { s: 1.0 } },
            ],
        };
        let mut field = build_field::<f64>(&spec, &InitScheme::Standard, &mut Rng::new(21))
            .unwrap();
        let shape = field.net_shape();
        let x0 = [0.31, -0.62];

        let mut flat = Vec::new();
        field.write_params(&mut flat);

        // Tape route: leaves for every trainable parameter, in flat order.
        let tape = Tape::new();
        let leaves = tape.leaves(&flat);
        let enc_len = field.encoder.trainable_len();
        let mut pos = enc_len;
        let mut layer_slices = Vec::new();
        for l in &field.net.layers {
            let nw = l.w.rows() * l.w.cols();
            let nb = l.b.len();
            layer_slices.push((
                &leaves[pos..pos + nw],
                &leaves[pos + nw..pos + nw + nb],
            ));
            pos += nw + nb;
        }
        let now = field.net.out_w.rows() * field.net.out_w.cols();
        let params = NetParams {
            enc: EncParams { fourier_b: Some(&leaves[..enc_len]), hash_tables: None },
            layers: layer_slices.iter().map(|(w, b)| (*w, *b)).collect(),
            out_w: &leaves[pos..pos + now],
            out_b: &leaves[pos + now..],
        };
        let x = [tape.leaf(x0[0]), tape.leaf(x0[1])];
        let pe = eval_generic(&shape, &params, &x, 2);
        let lap = pe.hess_diag[0] + pe.hess_diag[1];
        let adj = tape.gradient(lap);

        // Finite-difference route through the plain path.
        let h = 1e-6;
        for k in 0..flat.len() {
            let mut p = flat.clone();
            p[k] += h;
            field.read_params(&p);
            let lp = field.laplacian(&x0).unwrap()[0];
            p[k] -= 2.0 * h;
            field.read_params(&p);
            let lm = field.laplacian(&x0).unwrap()[0];
            let fd = (lp - lm) / (2.0 * h);
            let got = adj[leaves[k].index()];
            assert!(
                (got - fd).abs() <= 2e-5 * (1.0 + fd.abs()),
                "param {k}: tape {got} vs fd {fd}"
            );
        }
    }
}
