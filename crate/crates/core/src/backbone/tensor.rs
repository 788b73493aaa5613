use super::spec::{ChannelOrder, Preprocessing};
use crate::error::{Error, Result};
use crate::raster::RgbImage;

/// NHWC single-precision batch.
#[derive(Debug, Clone, PartialEq)]
pub struct InputBatch {
    pub n: usize,
    pub side: usize,
    pub data: Vec<f32>,
}

impl InputBatch {
    pub fn zeros(n: usize, side: usize) -> Self {
        InputBatch {
            n,
            side,
            data: vec![0.0; n * side * side * 3],
        }
    }

    pub fn image(&self, i: usize) -> &[f32] {
        let len = self.side * self.side * 3;
        &self.data[i * len..(i + 1) * len]
    }
}

/// Extracted features, shape `(batch, 7, 7, C)` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    pub batch: usize,
    pub shape: [usize; 3],
    pub data: Vec<f32>,
}

impl FeatureTensor {
    pub fn width(&self) -> usize {
        self.shape.iter().product()
    }

    /// Flattened features of sample `i`, in (row, column, channel) order.
    pub fn row(&self, i: usize) -> &[f32] {
        let w = self.width();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("backbone features"))
        }
    }

    pub fn concat(parts: &[FeatureTensor]) -> Result<FeatureTensor> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Backbone("nothing to concatenate".into()))?;
        let mut data = Vec::with_capacity(parts.iter().map(|p| p.data.len()).sum());
        for p in parts {
            if p.shape != first.shape {
                return Err(Error::ShapeMismatch {
                    declared: first.shape.to_vec(),
                    observed: p.shape.to_vec(),
                });
            }
            data.extend_from_slice(&p.data);
        }
        Ok(FeatureTensor {
            batch: parts.iter().map(|p| p.batch).sum(),
            shape: first.shape,
            data,
        })
    }
}

/// `(x * scale - mean) / std` per channel, channels reordered per recipe.
pub fn preprocess(images: &[RgbImage], recipe: &Preprocessing) -> Result<InputBatch> {
    recipe.validate()?;
    let side = images.first().map(|i| i.width() as usize).unwrap_or(0);
    for img in images {
        if img.width() as usize != side || img.height() as usize != side {
            return Err(Error::Backbone(format!(
                "preprocess expects square {side}x{side} images, got {}x{}",
                img.width(),
                img.height()
            )));
        }
    }
    let order: [usize; 3] = match recipe.channel_order {
        ChannelOrder::Rgb => [0, 1, 2],
        ChannelOrder::Bgr => [2, 1, 0],
    };
    let mut data = Vec::with_capacity(images.len() * side * side * 3);
    for img in images {
        for px in img.as_raw().chunks_exact(3) {
            for (k, &src) in order.iter().enumerate() {
                let x = px[src] as f64 * recipe.scale;
                data.push(((x - recipe.mean[k]) / recipe.std[k]) as f32);
            }
        }
    }
    Ok(InputBatch {
        n: images.len(),
        side,
        data,
    })
}
