//! Contrast enhancement and noise reduction applied to both views before matching.
//!
//! The fixed order is grayscale, then global histogram equalization, then
//! Gaussian denoising.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Gaussian kernel radius in pixels; 0 disables denoising.
    pub denoise_radius: usize,
    pub denoise_sigma: f64,
    pub equalize: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { denoise_radius: 2, denoise_sigma: 1.0, equalize: true }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.denoise_radius > 0 && !(self.denoise_sigma > 0.0 && self.denoise_sigma.is_finite()) {
            return Err(Error::Param(format!(
                "denoise_sigma must be positive when radius > 0, got {}",
                self.denoise_sigma
            )));
        }
        Ok(())
    }
}

/// Rec. 601 luma, `round(0.299 R + 0.587 G + 0.114 B)`. Gray input is returned unchanged.
pub fn to_grayscale(img: &ImageBuffer) -> Result<ImageBuffer> {
    match img.channels() {
        1 => Ok(img.clone()),
        3 => {
            let samples = img
                .samples()
                .chunks_exact(3)
                .map(|p| {
                    let y = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
                    y.round().clamp(0.0, 255.0) as u8
                })
                .collect();
            ImageBuffer::gray(img.width(), img.height(), samples)
        }
        c => Err(Error::Format(format!("cannot convert {c}-channel image to gray"))),
    }
}

/// Lookup table of global histogram equalization for `samples`.
pub fn equalization_lut(samples: &[u8]) -> [u8; 256] {
    let mut hist = [0u64; 256];
    for &s in samples {
        hist[s as usize] += 1;
    }
    let mut cdf = [0u64; 256];
    let mut acc = 0;
    for (c, h) in cdf.iter_mut().zip(hist) {
        acc += h;
        *c = acc;
    }
    let total = samples.len() as u64;
    let cdf_min = hist.iter().zip(cdf).find(|(h, _)| **h > 0).map_or(0, |(_, c)| c);
    let mut lut = [0u8; 256];
    if total == cdf_min {
        // Single occupied level: nothing to spread.
        for (i, l) in lut.iter_mut().enumerate() {
            *l = i as u8;
        }
        return lut;
    }
    let span = (total - cdf_min) as f64;
    for (i, l) in lut.iter_mut().enumerate() {
        let c = cdf[i].saturating_sub(cdf_min) as f64;
        *l = (c / span * 255.0).round() as u8;
    }
    lut
}

/// Global histogram equalization (a monotone intensity remap).
pub fn equalize_contrast(img: &ImageBuffer) -> Result<ImageBuffer> {
    img.require_gray("equalize_contrast")?;
    let lut = equalization_lut(img.samples());
    let samples = img.samples().iter().map(|&s| lut[s as usize]).collect();
    ImageBuffer::gray(img.width(), img.height(), samples)
}

/// Normalized 1D Gaussian taps for offsets `-radius..=radius`.
pub fn gaussian_kernel(radius: usize, sigma: f64) -> Vec<f64> {
    let r = radius as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= sum);
    k
}

/// Separable convolution with edge replication, on floating-point samples.
pub(crate) fn convolve_separable(
    src: &[f64],
    width: usize,
    height: usize,
    kernel: &[f64],
) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let clamp = |x: isize, n: usize| x.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; src.len()];
    for v in 0..height {
        let row = &src[v * width..(v + 1) * width];
        for u in 0..width {
            tmp[v * width + u] = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * row[clamp(u as isize + k as isize - r, width)])
                .sum();
        }
    }
    let mut out = vec![0.0; src.len()];
    for v in 0..height {
        for u in 0..width {
            out[v * width + u] = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * tmp[clamp(v as isize + k as isize - r, height) * width + u])
                .sum();
        }
    }
    out
}

/// Gaussian blur with edge replication; radius 0 is the identity.
pub fn denoise(img: &ImageBuffer, cfg: &PreprocessConfig) -> Result<ImageBuffer> {
    img.require_gray("denoise")?;
    cfg.validate()?;
    if cfg.denoise_radius == 0 {
        return Ok(img.clone());
    }
    let kernel = gaussian_kernel(cfg.denoise_radius, cfg.denoise_sigma);
    let src: Vec<f64> = img.samples().iter().map(|&s| s as f64).collect();
    let out = convolve_separable(&src, img.width(), img.height(), &kernel);
    let samples = out.iter().map(|&x| x.round().clamp(0.0, 255.0) as u8).collect();
    ImageBuffer::gray(img.width(), img.height(), samples)
}

/// Full preprocessing chain: grayscale, optional equalization, denoise.
pub fn preprocess(img: &ImageBuffer, cfg: &PreprocessConfig) -> Result<ImageBuffer> {
    let mut out = to_grayscale(img)?;
    if cfg.equalize {
        out = equalize_contrast(&out)?;
    }
    denoise(&out, cfg)
}
