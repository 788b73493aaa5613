//! Contrast, gamma and saturation jitter.
//!
//! With channels in [0, 1]:
//! contrast `x -> 0.5 + c (x - 0.5)`, gamma `x -> x^g`,
//! saturation `x -> gray + s (x - gray)` with `gray = 0.299 R + 0.587 G + 0.114 B`,
//! applied in that order, clamped, then re-quantized with round-to-nearest.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{AugmentConfig, Range};
use crate::error::{Error, Result};
use crate::raster::RgbImage;

pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IlluminationParams {
    pub contrast: f64,
    pub gamma: f64,
    pub saturation: f64,
}

impl IlluminationParams {
    pub const IDENTITY: IlluminationParams = IlluminationParams {
        contrast: 1.0,
        gamma: 1.0,
        saturation: 1.0,
    };

    /// Explicit parameters may sit on the range end points (the identity
    /// triple does); sampled ones never do.
    pub fn validate(&self, cfg: &AugmentConfig) -> Result<()> {
        check("contrast", self.contrast, cfg.contrast_range)?;
        check("gamma", self.gamma, cfg.gamma_range)?;
        check("saturation", self.saturation, cfg.saturation_range)
    }
}

fn check(name: &'static str, value: f64, range: Range) -> Result<()> {
    if value.is_finite() && range.contains_closed(value) {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange {
            name,
            value,
            low: range.low,
            high: range.high,
        })
    }
}

/// Uniform draw strictly inside `(low, high)`.
pub fn sample_open<R: Rng + ?Sized>(range: Range, rng: &mut R) -> f64 {
    if range.low == range.high {
        return range.low;
    }
    loop {
        let x = rng.gen_range(range.low..range.high);
        if x > range.low {
            return x;
        }
    }
}

/// Draws contrast, gamma, saturation in that order.
pub fn sample_illumination<R: Rng + ?Sized>(cfg: &AugmentConfig, rng: &mut R) -> IlluminationParams {
    let contrast = sample_open(cfg.contrast_range, rng);
    let gamma = sample_open(cfg.gamma_range, rng);
    let saturation = sample_open(cfg.saturation_range, rng);
    IlluminationParams {
        contrast,
        gamma,
        saturation,
    }
}

pub fn quantize(x: f64) -> u8 {
    (x.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn apply_illumination(img: &RgbImage, p: IlluminationParams) -> RgbImage {
    // contrast and gamma act per channel value: tabulate them
    let lut: Vec<f64> = (0..256)
        .map(|v| {
            let x = v as f64 / 255.0;
            let y = 0.5 + p.contrast * (x - 0.5);
            y.max(0.0).powf(p.gamma)
        })
        .collect();
    let mut out = img.clone();
    for px in out.pixels_mut() {
        let c = [lut[px[0] as usize], lut[px[1] as usize], lut[px[2] as usize]];
        let gray = LUMA[0] * c[0] + LUMA[1] * c[1] + LUMA[2] * c[2];
        for k in 0..3 {
            px[k] = quantize(gray + p.saturation * (c[k] - gray));
        }
    }
    out
}

pub fn illumination_jitter(img: &RgbImage, params: IlluminationParams, cfg: &AugmentConfig) -> Result<RgbImage> {
    params.validate(cfg)?;
    Ok(apply_illumination(img, params))
}
