//! Signals a field can be fit to: images, audio clips, and synthetic test
//! patterns, plus the sampling conventions that turn them into coordinate /
//! value pairs and a Laplacian pyramid for multiscale fitting.
//!
//! Values are normalized floats: images live in [0, 1] per channel, audio
//! in [-1, 1]. Fidelity is reported as peak signal-to-noise ratio against a
//! unit peak, capped at 200 dB so exact reconstructions stay finite.

pub mod pnm;
pub mod pyramid;
pub mod sample;
pub mod wav;

#[derive(Debug, thiserror::Error)]
pub enum SignalError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at byte {offset}: {what}")]
    Parse { offset: usize, what: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Raster image, row-major with interleaved channels, values in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// 1 (grayscale) or 3 (RGB).
    pub channels: usize,
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize) -> Image {
        Image { width, height, channels, data: vec![0.0; width * height * channels] }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Image {
        let mut img = Image::new(width, height, channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    img.data[(y * width + x) * channels + c] = f(x, y, c);
                }
            }
        }
        img
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }
}

/// Mono audio clip, values in [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Audio {
    pub sample_rate: u32,
    pub samples: Vec<f64>,
}

/// Peak signal-to-noise ratio in dB for unit-peak signals, capped at
/// 200 dB (an exact match would otherwise be infinite).
pub fn psnr(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "psnr needs equal-length signals");
    assert!(!a.is_empty(), "psnr of empty signals");
    let mse: f64 =
        a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64;
    psnr_from_mse(mse)
}

/// PSNR against a unit peak, capped at the documented 200 dB.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 1e-20 {
        return 200.0;
    }
    (10.0 * (1.0 / mse).log10()).min(200.0)
}

/// Synthetic grayscale test pattern mixing a radial frequency sweep with a
/// diagonal ramp: broad spectral content, no file dependency.
pub fn test_card(width: usize, height: usize) -> Image {
    Image::from_fn(width, height, 1, |x, y, _| {
        let u = 2.0 * (x as f64 + 0.5) / width as f64 - 1.0;
        let v = 2.0 * (y as f64 + 0.5) / height as f64 - 1.0;
        let r2 = u * u + v * v;
        let chirp = (std::f64::consts::PI * 14.0 * r2).sin();
        let ramp = 0.5 * (u + v);
        let stripes = (std::f64::consts::TAU * 6.0 * u).sin() * 0.5;
        let val = 0.5 + 0.22 * chirp + 0.14 * ramp + 0.1 * stripes;
        val.clamp(0.0, 1.0)
    })
}
