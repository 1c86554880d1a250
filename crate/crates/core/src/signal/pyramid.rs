//! Laplacian pyramid: a coarse base plus per-level residuals that
//! reconstruct the original exactly.
//!
//! Downsampling is 2x2 mean pooling (windows clip at odd edges);
//! upsampling is pixel-center bilinear interpolation with edge clamping.
//! Residual `j` stores `level_j - up(level_{j+1})`, so `reconstruct`
//! returns the original image bit-for-bit up to floating-point addition,
//! whatever the resampling filters do.

use super::Image;

#[derive(Clone, Debug)]
pub struct Pyramid {
    /// `residuals[0]` is the finest band.
    pub residuals: Vec<Image>,
    /// Coarsest low-pass level.
    pub base: Image,
}

/// 2x2 mean pool; odd trailing rows/columns average over the pixels that
/// exist.
pub fn downsample(img: &Image) -> Image {
    let (w2, h2) = (img.width.div_ceil(2), img.height.div_ceil(2));
    Image::from_fn(w2, h2, img.channels, |x, y, c| {
        let x0 = 2 * x;
        let y0 = 2 * y;
        let mut sum = 0.0;
        let mut count = 0.0;
        for dy in 0..2 {
            for dx in 0..2 {
                if x0 + dx < img.width && y0 + dy < img.height {
                    sum += img.get(x0 + dx, y0 + dy, c);
                    count += 1.0;
                }
            }
        }
        sum / count
    })
}

/// Pixel-center bilinear resize to (width, height) with edge clamping.
pub fn upsample(img: &Image, width: usize, height: usize) -> Image {
    let pick = |s: f64, n: usize| -> (usize, usize, f64) {
        let i0f = s.floor();
        let f = s - i0f;
        let i0 = (i0f as isize).clamp(0, n as isize - 1) as usize;
        let i1 = (i0f as isize + 1).clamp(0, n as isize - 1) as usize;
        (i0, i1, f)
    };
    Image::from_fn(width, height, img.channels, |x, y, c| {
        let sx = (x as f64 + 0.5) * img.width as f64 / width as f64 - 0.5;
        let sy = (y as f64 + 0.5) * img.height as f64 / height as f64 - 0.5;
        let (x0, x1, fx) = pick(sx, img.width);
        let (y0, y1, fy) = pick(sy, img.height);
        let top = (1.0 - fx) * img.get(x0, y0, c) + fx * img.get(x1, y0, c);
        let bot = (1.0 - fx) * img.get(x0, y1, c) + fx * img.get(x1, y1, c);
        (1.0 - fy) * top + fy * bot
    })
}

impl Pyramid {
    /// Decompose with `levels` downsampling steps (so `levels` residual
    /// bands plus the base).
    pub fn build(img: &Image, levels: usize) -> Pyramid {
        let mut residuals = Vec::with_capacity(levels);
        let mut current = img.clone();
        for _ in 0..levels {
            let down = downsample(&current);
            let up = upsample(&down, current.width, current.height);
            let mut res = current.clone();
            for (r, u) in res.data.iter_mut().zip(&up.data) {
                *r -= u;
            }
            residuals.push(res);
            current = down;
        }
        Pyramid { residuals, base: current }
    }

    pub fn levels(&self) -> usize {
        self.residuals.len()
    }

    /// Full reconstruction; exact by construction.
    pub fn reconstruct(&self) -> Image {
        self.reconstruct_partial(self.levels())
    }

    /// Reconstruction using the base and the `included` coarsest residual
    /// bands, upsampled to full resolution. `included = levels()` is the
    /// exact reconstruction; smaller values drop the finest bands.
    pub fn reconstruct_partial(&self, included: usize) -> Image {
        assert!(included <= self.levels());
        let mut current = self.base.clone();
        for j in (0..self.levels()).rev() {
            let res = &self.residuals[j];
            let mut up = upsample(&current, res.width, res.height);
            // Residual index levels()-1 is the coarsest band.
            if self.levels() - j <= included {
                for (u, r) in up.data.iter_mut().zip(&res.data) {
                    *u += r;
                }
            }
            current = up;
        }
        current
    }
}
