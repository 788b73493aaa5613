use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::Range;
use crate::error::{Error, Result};
use crate::raster::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRect {
    pub top: u32,
    pub left: u32,
    pub height: u32,
    pub width: u32,
}

/// Inclusive bounds for a cropped side of an original side `side`.
pub fn crop_side_bounds(side: u32, fraction: Range) -> (u32, u32) {
    let lo = ((fraction.low * side as f64) - 1e-9).ceil().max(1.0) as u32;
    let hi = ((fraction.high * side as f64) + 1e-9).floor() as u32;
    (lo.min(side), hi.clamp(lo.min(side), side))
}

fn check_dims(img: &RgbImage) -> Result<()> {
    let (w, h) = img.dimensions();
    if w < 2 || h < 2 {
        return Err(Error::DegenerateImage {
            width: w,
            height: h,
            reason: "crop needs at least 2 pixels per side",
        });
    }
    Ok(())
}

/// Draws height, width, top, left in that order.
pub fn sample_crop<R: Rng + ?Sized>(height: u32, width: u32, fraction: Range, rng: &mut R) -> CropRect {
    let (hlo, hhi) = crop_side_bounds(height, fraction);
    let (wlo, whi) = crop_side_bounds(width, fraction);
    let h = rng.gen_range(hlo..=hhi);
    let w = rng.gen_range(wlo..=whi);
    let top = rng.gen_range(0..=height - h);
    let left = rng.gen_range(0..=width - w);
    CropRect {
        top,
        left,
        height: h,
        width: w,
    }
}

/// Copies the sub-rectangle without resampling.
pub fn crop(img: &RgbImage, rect: CropRect) -> Result<RgbImage> {
    let (w, h) = img.dimensions();
    if rect.height == 0
        || rect.width == 0
        || rect.top + rect.height > h
        || rect.left + rect.width > w
    {
        return Err(Error::Config(format!(
            "crop {rect:?} does not fit inside {w}x{h}"
        )));
    }
    let src = img.as_raw();
    let row_bytes = (rect.width * 3) as usize;
    let mut out = Vec::with_capacity(row_bytes * rect.height as usize);
    for y in rect.top..rect.top + rect.height {
        let start = ((y * w + rect.left) * 3) as usize;
        out.extend_from_slice(&src[start..start + row_bytes]);
    }
    Ok(RgbImage::from_raw(rect.width, rect.height, out).expect("buffer sized to rect"))
}

pub fn random_crop<R: Rng + ?Sized>(img: &RgbImage, fraction: Range, rng: &mut R) -> Result<(RgbImage, CropRect)> {
    check_dims(img)?;
    let rect = sample_crop(img.height(), img.width(), fraction, rng);
    Ok((crop(img, rect)?, rect))
}
