//! Sampling conventions: how discrete signals map onto the [-1, 1]^d
//! coordinate cube.
//!
//! Samples sit at cell centers: index `i` of `n` maps to
//! `x = 2 (i + 1/2) / n - 1`, so a 2-sample axis lands on {-1/2, +1/2} and
//! no sample touches the cube boundary. Images use `[x, y]` coordinate
//! order (x along the width) with samples emitted row-major, matching the
//! pixel layout.

use super::{Audio, Image};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Regular sampling lattice geometry of a gridded signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridShape {
    One(usize),
    /// (width, height), samples row-major.
    Two(usize, usize),
}

impl GridShape {
    pub fn len(&self) -> usize {
        match self {
            GridShape::One(n) => *n,
            GridShape::Two(w, h) => w * h,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Center coordinate of cell `i` out of `n`.
pub fn center(i: usize, n: usize) -> f64 {
    2.0 * (i as f64 + 0.5) / n as f64 - 1.0
}

/// n x 1 coordinate grid for a 1D signal.
pub fn grid_1d<F: Scalar>(n: usize) -> Matrix<F> {
    Matrix::from_fn(n, 1, |i, _| F::c(center(i, n)))
}

/// (width * height) x 2 coordinate grid, row-major, columns [x, y].
pub fn grid_2d<F: Scalar>(width: usize, height: usize) -> Matrix<F> {
    Matrix::from_fn(width * height, 2, |i, j| {
        if j == 0 {
            F::c(center(i % width, width))
        } else {
            F::c(center(i / width, height))
        }
    })
}

/// Image as (coordinates, values): n x 2 and n x channels.
pub fn image_samples<F: Scalar>(img: &Image) -> (Matrix<F>, Matrix<F>) {
    let xs = grid_2d(img.width, img.height);
    let ys = Matrix::from_fn(img.width * img.height, img.channels, |i, c| {
        F::c(img.data[i * img.channels + c])
    });
    (xs, ys)
}

/// Audio as (coordinates, values): n x 1 and n x 1.
pub fn audio_samples<F: Scalar>(audio: &Audio) -> (Matrix<F>, Matrix<F>) {
    let n = audio.samples.len();
    let xs = grid_1d(n);
    let ys = Matrix::from_fn(n, 1, |i, _| F::c(audio.samples[i]));
    (xs, ys)
}

/// Reassemble model outputs (n x channels, row-major sample order) into an
/// image, clamping to [0, 1].
pub fn image_from_outputs<F: Scalar>(width: usize, height: usize, ys: &Matrix<F>) -> Image {
    assert_eq!(ys.rows(), width * height);
    let channels = ys.cols();
    let mut img = Image::new(width, height, channels);
    for i in 0..ys.rows() {
        for c in 0..channels {
            img.data[i * channels + c] = ys[(i, c)].primal().clamp(0.0, 1.0);
        }
    }
    img
}
