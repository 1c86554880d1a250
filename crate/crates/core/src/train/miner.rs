//! Coarse-to-fine image fitting over a Laplacian pyramid: one small net
//! for the coarsest level, plus a grid of small nets per residual band,
//! training only the patches that carry residual energy.
//!
//! A patch is active when its share of the band's residual energy exceeds
//! `tau`; pruned patches contribute exactly zero. Patch nets see local
//! coordinates: each patch's pixel lattice is mapped to [-1, 1]^2 by the
//! usual pixel-center convention.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Field, FieldSpec};
use crate::init::{build_field, InitScheme};
use crate::objective::{Objective, SampledSignal};
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::signal::pyramid::Pyramid;
use crate::signal::sample::{self, center};
use crate::signal::Image;
use crate::train::fit::{fit, FitConfig};
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct MinerConfig {
    /// Scale levels; 1 degenerates to a single full-image fit.
    pub levels: usize,
    /// Patch edge length in pixels at every band.
    pub patch: usize,
    /// Residual-energy fraction below which a patch is pruned.
    pub tau: f64,
    /// Adam steps per net.
    pub steps: usize,
    pub lr: Option<f64>,
    pub seed: u64,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig { levels: 3, patch: 32, tau: 1e-4, steps: 500, lr: None, seed: 0 }
    }
}

/// One residual band: a patch grid of optional nets (pruned = None).
#[derive(Clone, Debug)]
pub struct MinerBand<F: Scalar = f64> {
    pub width: usize,
    pub height: usize,
    pub patches_x: usize,
    pub patches_y: usize,
    /// Row-major patch grid; `None` marks a pruned patch.
    pub nets: Vec<Option<Field<F>>>,
}

impl<F: Scalar> MinerBand<F> {
    pub fn active_count(&self) -> usize {
        self.nets.iter().filter(|n| n.is_some()).count()
    }
}

#[derive(Clone, Debug)]
pub struct MinerModel<F: Scalar = f64> {
    pub patch: usize,
    pub channels: usize,
    pub coarse: Field<F>,
    pub coarse_w: usize,
    pub coarse_h: usize,
    /// `bands[0]` is the finest band, matching [`Pyramid`].
    pub bands: Vec<MinerBand<F>>,
}

fn patch_signal<F: Scalar>(band: &Image, p: usize, x0: usize, y0: usize) -> SampledSignal<F> {
    let xs = Matrix::from_fn(p * p, 2, |i, j| {
        if j == 0 {
            F::c(center(i % p, p))
        } else {
            F::c(center(i / p, p))
        }
    });
    let ys = Matrix::from_fn(p * p, band.channels, |i, c| {
        F::c(band.get(x0 + i % p, y0 + i / p, c))
    });
    SampledSignal::new(xs, ys).expect("patch is non-empty")
}

/// Fit the pyramid decomposition of `img`: the base level with one net,
/// each band with per-patch nets where the residual energy warrants it.
/// `net` is the architecture template used for every net (in_dim 2,
/// out_dim = channels).
pub fn miner_fit<F: Scalar>(
    img: &Image,
    net: &FieldSpec,
    scheme: &InitScheme,
    cfg: &MinerConfig,
) -> Result<MinerModel<F>> {
    if cfg.levels == 0 {
        return Err(Error::InvalidParam("pyramid fitting needs >= 1 level".into()));
    }
    if net.in_dim != 2 || net.out_dim != img.channels {
        return Err(Error::Incompatible(format!(
            "net template is {}->{}, image needs 2->{}",
            net.in_dim, net.out_dim, img.channels
        )));
    }
    let div = 1usize << (cfg.levels - 1);
    if img.width % div != 0 || img.height % div != 0 {
        return Err(Error::Incompatible(format!(
            "{}x{} image is not divisible by 2^{}",
            img.width,
            img.height,
            cfg.levels - 1
        )));
    }
    for j in 0..cfg.levels - 1 {
        let (bw, bh) = (img.width >> j, img.height >> j);
        if bw % cfg.patch != 0 || bh % cfg.patch != 0 {
            return Err(Error::Incompatible(format!(
                "band {j} ({bw}x{bh}) is not divisible by patch size {}",
                cfg.patch
            )));
        }
    }

    let pyr = Pyramid::build(img, cfg.levels - 1);
    let fit_cfg = |seed: u64| FitConfig {
        steps: cfg.steps,
        lr: cfg.lr,
        batch_size: None,
        seed,
        psnr_every: usize::MAX,
    };

    let mut coarse =
        build_field::<F>(net, scheme, &mut Rng::substream(cfg.seed, 1 << 63))?;
    let base_data = SampledSignal::from_image(&pyr.base);
    fit(&mut coarse, &base_data, &Objective::value(), &fit_cfg(cfg.seed ^ (1 << 63)))?;

    let mut bands = Vec::with_capacity(pyr.levels());
    for (j, band) in pyr.residuals.iter().enumerate() {
        let p = cfg.patch;
        let (px, py) = (band.width / p, band.height / p);
        let band_energy: f64 = band.data.iter().map(|v| v * v).sum();
        let jobs: Vec<(usize, bool)> = (0..px * py)
            .map(|k| {
                let (bx, by) = (k % px, k / px);
                let mut e = 0.0;
                for dy in 0..p {
                    for dx in 0..p {
                        for c in 0..band.channels {
                            let v = band.get(bx * p + dx, by * p + dy, c);
                            e += v * v;
                        }
                    }
                }
                (k, band_energy > 0.0 && e / band_energy > cfg.tau)
            })
            .collect();
        let nets: Vec<Option<Field<F>>> = jobs
            .par_iter()
            .map(|&(k, active)| -> Result<Option<Field<F>>> {
                if !active {
                    return Ok(None);
                }
                let (bx, by) = (k % px, k / px);
                let stream = ((j as u64 + 1) << 40) + k as u64;
                let mut f = build_field::<F>(net, scheme, &mut Rng::substream(cfg.seed, stream))?;
                let data = patch_signal(band, p, bx * p, by * p);
                fit(&mut f, &data, &Objective::value(), &fit_cfg(cfg.seed ^ stream))?;
                Ok(Some(f))
            })
            .collect::<Result<_>>()?;
        bands.push(MinerBand { width: band.width, height: band.height, patches_x: px, patches_y: py, nets });
    }

    Ok(MinerModel {
        patch: cfg.patch,
        channels: img.channels,
        coarse,
        coarse_w: pyr.base.width,
        coarse_h: pyr.base.height,
        bands,
    })
}

impl<F: Scalar> MinerModel<F> {
    /// Sample every net on its own lattice: the base image estimate plus
    /// one residual image per band (zero over pruned patches).
    pub fn band_images(&self) -> (Image, Vec<Image>) {
        let grid = sample::grid_2d::<F>(self.coarse_w, self.coarse_h);
        let out = self.coarse.forward_batch(&grid);
        let mut base = Image::new(self.coarse_w, self.coarse_h, self.channels);
        for i in 0..out.rows() {
            for c in 0..self.channels {
                base.data[i * self.channels + c] = out[(i, c)].primal();
            }
        }
        let p = self.patch;
        let patch_grid = sample::grid_2d::<F>(p, p);
        let bands = self
            .bands
            .iter()
            .map(|band| {
                let mut img = Image::new(band.width, band.height, self.channels);
                for (k, net) in band.nets.iter().enumerate() {
                    let Some(net) = net else { continue };
                    let (bx, by) = (k % band.patches_x, k / band.patches_x);
                    let vals = net.forward_batch(&patch_grid);
                    for i in 0..p * p {
                        let (x, y) = (bx * p + i % p, by * p + i / p);
                        for c in 0..self.channels {
                            img.data[(y * band.width + x) * self.channels + c] =
                                vals[(i, c)].primal();
                        }
                    }
                }
                img
            })
            .collect();
        (base, bands)
    }

    /// Reconstruct on the full pixel grid through the pyramid, using the
    /// `included` coarsest bands (all of them = the full model).
    pub fn reconstruct_partial(&self, included: usize) -> Image {
        let (base, residuals) = self.band_images();
        Pyramid { residuals, base }.reconstruct_partial(included)
    }

    pub fn reconstruct(&self) -> Image {
        self.reconstruct_partial(self.bands.len())
    }

    /// Continuous evaluation at `x` in [-1,1]^2: the coarse net plus each
    /// band's patch net at patch-local coordinates.
    pub fn eval(&self, x: &[F]) -> Vec<F> {
        let pe = self.coarse.eval_point(x, 0).expect("order-0 eval cannot fail");
        let mut acc = pe.value;
        for band in &self.bands {
            let (w, h, p) = (band.width, band.height, self.patch);
            let fx = (x[0].primal() + 1.0) / 2.0 * w as f64;
            let fy = (x[1].primal() + 1.0) / 2.0 * h as f64;
            let pxi = ((fx as usize).min(w - 1)) / p;
            let pyi = ((fy as usize).min(h - 1)) / p;
            let k = pyi * band.patches_x + pxi;
            let Some(net) = &band.nets[k] else { continue };
            let lx = F::c(2.0 * (fx - (pxi * p) as f64) / p as f64 - 1.0);
            let ly = F::c(2.0 * (fy - (pyi * p) as f64) / p as f64 - 1.0);
            let v = net.eval_point(&[lx, ly], 0).expect("order-0 eval cannot fail");
            for (a, b) in acc.iter_mut().zip(&v.value) {
                *a += *b;
            }
        }
        acc
    }
}
