//! Predictions from images: single-image path, five-crop averaging and the
//! outlier-excluding argmax.

use serde::{Deserialize, Serialize};

use crate::augment::{crop, resize_to_input, CropRect};
use crate::backbone::Backbone;
use crate::dataset::ClassCatalog;
use crate::error::{Error, Result};
use crate::head::{infer, HeadParams, HeadSpec, Matrix};
use crate::raster::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtaConfig {
    pub enabled: bool,
    pub corner_fraction: f64,
    pub segments: usize,
}

impl Default for TtaConfig {
    fn default() -> Self {
        TtaConfig {
            enabled: false,
            corner_fraction: 0.75,
            segments: 5,
        }
    }
}

impl TtaConfig {
    pub fn on() -> Self {
        TtaConfig {
            enabled: true,
            ..TtaConfig::default()
        }
    }

    pub fn with_enabled(enabled: bool) -> Self {
        TtaConfig {
            enabled,
            ..TtaConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.corner_fraction > 0.0 && self.corner_fraction < 1.0) {
            return Err(Error::Config(format!(
                "corner fraction {} must lie in (0, 1)",
                self.corner_fraction
            )));
        }
        if self.segments != 5 {
            return Err(Error::Config("five-crop uses exactly 5 segments".into()));
        }
        Ok(())
    }
}

/// Full image followed by top-left, top-right, bottom-left and bottom-right
/// crops of `⌊f·H⌋ × ⌊f·W⌋`.
pub fn five_crop(img: &RgbImage, fraction: f64) -> Result<Vec<RgbImage>> {
    let (w, h) = img.dimensions();
    if w < 2 || h < 2 {
        return Err(Error::DegenerateImage {
            width: w,
            height: h,
            reason: "five-crop needs at least 2x2 pixels",
        });
    }
    let ch = ((f64::from(h) * fraction).floor() as u32).max(1);
    let cw = ((f64::from(w) * fraction).floor() as u32).max(1);
    let mut out = vec![img.clone()];
    for (top, left) in [(0, 0), (0, w - cw), (h - ch, 0), (h - ch, w - cw)] {
        out.push(crop(
            img,
            CropRect {
                top,
                left,
                height: ch,
                width: cw,
            },
        )?);
    }
    Ok(out)
}

/// Argmax over every index except `outlier`, lowest index on ties.
pub fn material_argmax_index(probs: &[f64], outlier: Option<usize>) -> usize {
    let mut best: Option<usize> = None;
    for (i, &p) in probs.iter().enumerate() {
        if Some(i) == outlier {
            continue;
        }
        match best {
            Some(b) if probs[b] >= p => {}
            _ => best = Some(i),
        }
    }
    best.unwrap_or(0)
}

/// The best material class; the outlier class can never win.
pub fn material_argmax(probs: &[f64], catalog: &ClassCatalog) -> Result<usize> {
    if probs.len() != catalog.total_classes() {
        return Err(Error::Head(format!(
            "probability vector has {} entries, catalog has {} classes",
            probs.len(),
            catalog.total_classes()
        )));
    }
    if !probs.iter().all(|p| p.is_finite()) {
        return Err(Error::NonFinite("probability vector"));
    }
    Ok(material_argmax_index(probs, catalog.outlier_index()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionVector {
    pub probs: Vec<f64>,
    pub predicted_index: usize,
    pub tta_used: bool,
}

/// A trained head bound to its backbone and catalog. Read-only, so it can
/// be shared across threads.
pub struct Classifier<'a> {
    pub backbone: &'a dyn Backbone,
    pub head: &'a HeadSpec,
    pub params: &'a HeadParams,
    pub catalog: &'a ClassCatalog,
}

impl<'a> Classifier<'a> {
    pub fn new(
        backbone: &'a dyn Backbone,
        head: &'a HeadSpec,
        params: &'a HeadParams,
        catalog: &'a ClassCatalog,
    ) -> Result<Self> {
        let flat = backbone.spec().flatten_size();
        if head.flatten_in != flat {
            return Err(Error::ShapeMismatch {
                declared: vec![head.flatten_in],
                observed: vec![flat],
            });
        }
        if head.out_classes != catalog.total_classes() {
            return Err(Error::Head(format!(
                "head has {} outputs, catalog has {} classes",
                head.out_classes,
                catalog.total_classes()
            )));
        }
        params.check(head)?;
        Ok(Classifier {
            backbone,
            head,
            params,
            catalog,
        })
    }

    /// Infer-mode probabilities for each image after resizing to the input side.
    pub fn probabilities(&self, images: &[RgbImage]) -> Result<Matrix> {
        let side = self.backbone.spec().input_side;
        let resized: Vec<RgbImage> = images.iter().map(|i| resize_to_input(i, side)).collect();
        let features = self.backbone.features_for(&resized)?;
        let x = Matrix::from_f32(features.batch, features.width(), &features.data);
        infer(self.head, self.params, &x)
    }

    pub fn predict(&self, image: &RgbImage, tta: &TtaConfig) -> Result<PredictionVector> {
        let probs = if tta.enabled {
            tta.validate()?;
            let segments = five_crop(image, tta.corner_fraction)?;
            let p = self.probabilities(&segments)?;
            let n = p.rows as f64;
            p.column_sums().into_iter().map(|s| s / n).collect::<Vec<_>>()
        } else {
            self.probabilities(std::slice::from_ref(image))?.row(0).to_vec()
        };
        let predicted_index = material_argmax(&probs, self.catalog)?;
        Ok(PredictionVector {
            probs,
            predicted_index,
            tta_used: tta.enabled,
        })
    }
}

pub fn predict(
    image: &RgbImage,
    backbone: &dyn Backbone,
    head: &HeadSpec,
    params: &HeadParams,
    catalog: &ClassCatalog,
    tta: &TtaConfig,
) -> Result<PredictionVector> {
    Classifier::new(backbone, head, params, catalog)?.predict(image, tta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    #[test]
    fn outlier_never_wins() {
        let catalog = ClassCatalog::published(true);
        let mut probs = vec![0.03; 12];
        probs[11] = 0.5;
        probs[5] = 0.2;
        let idx = material_argmax(&probs, &catalog).unwrap();
        assert_eq!(catalog.name(idx), Some("Brick"));
    }

    #[test]
    fn plain_argmax_without_outlier() {
        let catalog = ClassCatalog::published(false);
        let stone = catalog.index_of("Stone").unwrap();
        let mut probs = vec![0.05; 11];
        probs[stone] = 0.5;
        assert_eq!(material_argmax(&probs, &catalog).unwrap(), stone);
        probs[0] = f64::NAN;
        assert!(material_argmax(&probs, &catalog).is_err());
    }

    #[test]
    fn five_crop_geometry() {
        let img = RgbImage::from_fn(400, 400, |x, y| Rgb([(x % 256) as u8, (y % 256) as u8, 7]));
        let crops = five_crop(&img, 0.75).unwrap();
        assert_eq!(crops.len(), 5);
        assert_eq!(crops[0], img);
        for c in &crops[1..] {
            assert_eq!(c.dimensions(), (300, 300));
        }
        assert_eq!(crops[1].get_pixel(0, 0), img.get_pixel(0, 0));
        assert_eq!(crops[4].get_pixel(299, 299), img.get_pixel(399, 399));
        assert_eq!(crops[2].get_pixel(299, 0), img.get_pixel(399, 0));
        assert_eq!(crops[3].get_pixel(0, 299), img.get_pixel(0, 399));
        assert!(five_crop(&RgbImage::new(1, 5), 0.75).is_err());
    }
}
