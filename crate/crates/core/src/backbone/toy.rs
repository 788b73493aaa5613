//! A cheap deterministic stand-in for a pretrained trunk.
//!
//! Each 32x32 cell of the 224x224 input is average-pooled in 8x8 blocks to
//! a 4x4x3 patch, and a fixed seeded linear map (no bias) sends the 48
//! patch values to `C` channels. The result has the same (7, 7, C) layout
//! as the real no-top trunks.

use rand::Rng;
use rayon::prelude::*;

use super::spec::{BackboneSpec, Preprocessing, FEATURE_GRID, INPUT_SIDE, TOY_NAME};
use super::tensor::{FeatureTensor, InputBatch};
use super::Backbone;
use crate::error::{Error, Result};
use crate::rng::derive_rng;

pub const POOL: usize = 8;
pub const PATCH: usize = 4;
pub const TOY_OPSET: i64 = 13;

#[derive(Debug, Clone)]
pub struct ToyBackbone {
    spec: BackboneSpec,
    /// Layout `[C][3][PATCH][PATCH]`, matching an ONNX Conv kernel.
    weights: Vec<f32>,
}

impl ToyBackbone {
    pub fn new(seed: u64, channels: usize) -> Result<Self> {
        if channels < 1 {
            return Err(Error::Backbone("toy backbone needs at least one channel".into()));
        }
        let fan_in = 3 * PATCH * PATCH;
        let limit = (3.0 / fan_in as f64).sqrt();
        let mut rng = derive_rng("toy-backbone", seed, channels as u64);
        let weights = (0..channels * fan_in)
            .map(|_| rng.gen_range(-limit..limit) as f32)
            .collect();
        let spec = BackboneSpec {
            name: TOY_NAME.to_string(),
            input_side: INPUT_SIDE,
            output_shape: [FEATURE_GRID, FEATURE_GRID, channels],
            preprocessing: Preprocessing::SYMMETRIC,
            opset: Some(TOY_OPSET),
            source_note: format!("seeded random linear map over 8x8-pooled patches (seed {seed})"),
            toy_seed: Some(seed),
        };
        Ok(ToyBackbone { spec, weights })
    }

    pub fn from_spec(spec: &BackboneSpec) -> Result<Self> {
        let seed = spec
            .toy_seed
            .ok_or_else(|| Error::Backbone("toy spec without seed".into()))?;
        let mut toy = ToyBackbone::new(seed, spec.channels())?;
        toy.spec.preprocessing = spec.preprocessing;
        Ok(toy)
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    fn extract_one(&self, img: &[f32], out: &mut [f32]) {
        let side = INPUT_SIDE as usize;
        let pooled_side = side / POOL;
        let mut pooled = vec![0f32; pooled_side * pooled_side * 3];
        let norm = 1.0 / (POOL * POOL) as f32;
        for py in 0..pooled_side {
            for px in 0..pooled_side {
                let mut acc = [0f32; 3];
                for y in py * POOL..(py + 1) * POOL {
                    let row = &img[(y * side + px * POOL) * 3..(y * side + (px + 1) * POOL) * 3];
                    for p in row.chunks_exact(3) {
                        acc[0] += p[0];
                        acc[1] += p[1];
                        acc[2] += p[2];
                    }
                }
                let base = (py * pooled_side + px) * 3;
                for k in 0..3 {
                    pooled[base + k] = acc[k] * norm;
                }
            }
        }
        let c_out = self.spec.channels();
        let mut patch = [0f32; 3 * PATCH * PATCH];
        for cy in 0..FEATURE_GRID {
            for cx in 0..FEATURE_GRID {
                // gather in [ch][ky][kx] order to line up with the kernel
                for ch in 0..3 {
                    for ky in 0..PATCH {
                        for kx in 0..PATCH {
                            let p = ((cy * PATCH + ky) * pooled_side + cx * PATCH + kx) * 3 + ch;
                            patch[(ch * PATCH + ky) * PATCH + kx] = pooled[p];
                        }
                    }
                }
                let dst = &mut out[(cy * FEATURE_GRID + cx) * c_out..(cy * FEATURE_GRID + cx + 1) * c_out];
                for (c, d) in dst.iter_mut().enumerate() {
                    let w = &self.weights[c * patch.len()..(c + 1) * patch.len()];
                    *d = w.iter().zip(&patch).map(|(a, b)| a * b).sum();
                }
            }
        }
    }
}

impl Backbone for ToyBackbone {
    fn spec(&self) -> &BackboneSpec {
        &self.spec
    }

    fn extract(&self, batch: &InputBatch) -> Result<FeatureTensor> {
        if batch.side != INPUT_SIDE as usize {
            return Err(Error::Backbone(format!(
                "toy backbone expects {INPUT_SIDE}x{INPUT_SIDE} input, got {}",
                batch.side
            )));
        }
        let width = self.spec.flatten_size();
        let mut data = vec![0f32; batch.n * width];
        data.par_chunks_mut(width)
            .enumerate()
            .for_each(|(i, out)| self.extract_one(batch.image(i), out));
        let features = FeatureTensor {
            batch: batch.n,
            shape: self.spec.output_shape,
            data,
        };
        features.check_finite()?;
        Ok(features)
    }
}
