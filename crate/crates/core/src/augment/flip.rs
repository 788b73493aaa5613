use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::raster::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FlipDecision {
    /// Mirror left-right.
    pub horizontal: bool,
    /// Mirror top-bottom.
    pub vertical: bool,
}

/// Independent draws per axis, horizontal first.
pub fn sample_flip<R: Rng + ?Sized>(prob_per_axis: f64, rng: &mut R) -> FlipDecision {
    let horizontal = rng.gen_bool(prob_per_axis);
    let vertical = rng.gen_bool(prob_per_axis);
    FlipDecision {
        horizontal,
        vertical,
    }
}

pub fn apply_flip(img: &RgbImage, flip: FlipDecision) -> RgbImage {
    let mut out = img.clone();
    if flip.horizontal {
        image::imageops::flip_horizontal_in_place(&mut out);
    }
    if flip.vertical {
        image::imageops::flip_vertical_in_place(&mut out);
    }
    out
}

pub fn random_flip<R: Rng + ?Sized>(img: &RgbImage, prob_per_axis: f64, rng: &mut R) -> (RgbImage, FlipDecision) {
    let flip = sample_flip(prob_per_axis, rng);
    (apply_flip(img, flip), flip)
}
