use rand::Rng;

use super::matrix::Matrix;
use super::spec::{HeadSpec, LayerSpec};
use crate::error::{Error, Result};
use crate::rng::derive_rng;

/// Parameters are held at single precision: every stored value is exactly
/// representable as f32, which keeps checkpoints lossless.
pub fn snap(x: f64) -> f64 {
    x as f32 as f64
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerParams {
    None,
    /// `weight` is `(inputs, units)`.
    Dense { weight: Matrix, bias: Vec<f64> },
    BatchNorm {
        gamma: Vec<f64>,
        beta: Vec<f64>,
        running_mean: Vec<f64>,
        running_var: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub layers: Vec<LayerParams>,
    pub init_seed: u64,
}

/// He-uniform dense weights (limit `sqrt(6 / fan_in)`), zero biases,
/// batchnorm gamma 1, beta 0, running mean 0, running variance 1.
pub fn build_head(spec: &HeadSpec, seed: u64) -> Result<HeadParams> {
    spec.validate()?;
    let layers = spec
        .layers
        .iter()
        .zip(spec.widths())
        .enumerate()
        .map(|(i, (layer, fan_in))| match *layer {
            LayerSpec::Dense { units } => {
                let limit = (6.0 / fan_in as f64).sqrt();
                let mut rng = derive_rng("head-init", seed, i as u64);
                let data = (0..fan_in * units)
                    .map(|_| snap(rng.gen_range(-limit..limit)))
                    .collect();
                LayerParams::Dense {
                    weight: Matrix::from_vec(fan_in, units, data),
                    bias: vec![0.0; units],
                }
            }
            LayerSpec::BatchNorm { .. } => LayerParams::BatchNorm {
                gamma: vec![1.0; fan_in],
                beta: vec![0.0; fan_in],
                running_mean: vec![0.0; fan_in],
                running_var: vec![1.0; fan_in],
            },
            _ => LayerParams::None,
        })
        .collect();
    Ok(HeadParams {
        layers,
        init_seed: seed,
    })
}

impl HeadParams {
    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                LayerParams::None => 0,
                LayerParams::Dense { weight, bias } => weight.data.len() + bias.len(),
                LayerParams::BatchNorm { gamma, .. } => 4 * gamma.len(),
            })
            .sum()
    }

    /// Every stored tensor in checkpoint order: per dense layer weight then
    /// bias; per batchnorm gamma, beta, running mean, running variance.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for l in &self.layers {
            match l {
                LayerParams::None => {}
                LayerParams::Dense { weight, bias } => {
                    out.push(&weight.data);
                    out.push(bias);
                }
                LayerParams::BatchNorm {
                    gamma,
                    beta,
                    running_mean,
                    running_var,
                } => {
                    out.push(gamma);
                    out.push(beta);
                    out.push(running_mean);
                    out.push(running_var);
                }
            }
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for l in &mut self.layers {
            match l {
                LayerParams::None => {}
                LayerParams::Dense { weight, bias } => {
                    out.push(&mut weight.data);
                    out.push(bias);
                }
                LayerParams::BatchNorm {
                    gamma,
                    beta,
                    running_mean,
                    running_var,
                } => {
                    out.push(gamma);
                    out.push(beta);
                    out.push(running_mean);
                    out.push(running_var);
                }
            }
        }
        out
    }

    /// Tensors updated by the optimizer, in the same order as [`Grads::tensors`](super::Grads::tensors).
    pub fn trainable_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for l in &mut self.layers {
            match l {
                LayerParams::None => {}
                LayerParams::Dense { weight, bias } => {
                    out.push(&mut weight.data);
                    out.push(bias);
                }
                LayerParams::BatchNorm { gamma, beta, .. } => {
                    out.push(gamma);
                    out.push(beta);
                }
            }
        }
        out
    }

    pub fn check(&self, spec: &HeadSpec) -> Result<()> {
        if self.layers.len() != spec.layers.len() {
            return Err(Error::Head("parameter/spec layer count mismatch".into()));
        }
        for ((p, l), w) in self.layers.iter().zip(&spec.layers).zip(spec.widths()) {
            let ok = match (p, l) {
                (LayerParams::Dense { weight, bias }, LayerSpec::Dense { units }) => {
                    weight.rows == w && weight.cols == *units && bias.len() == *units
                }
                (
                    LayerParams::BatchNorm {
                        gamma,
                        beta,
                        running_mean,
                        running_var,
                    },
                    LayerSpec::BatchNorm { .. },
                ) => {
                    [gamma.len(), beta.len(), running_mean.len(), running_var.len()]
                        .iter()
                        .all(|&n| n == w)
                        && running_var.iter().all(|&v| v > 0.0)
                }
                (LayerParams::None, LayerSpec::Dropout { .. } | LayerSpec::Relu | LayerSpec::Softmax) => true,
                _ => false,
            };
            if !ok {
                return Err(Error::Head(format!("parameters do not match layer {l:?}")));
            }
        }
        if !self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite("head parameters"));
        }
        Ok(())
    }

    /// SHA-256 over the little-endian f32 parameter blob.
    pub fn digest(&self) -> String {
        let mut bytes = Vec::with_capacity(self.parameter_count() * 4);
        for t in self.tensors() {
            for &v in t {
                bytes.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        crate::canonical::sha256_hex(&bytes)
    }

    /// Zeroes every dense weight and bias.
    pub fn zero_dense(&mut self) {
        for l in &mut self.layers {
            if let LayerParams::Dense { weight, bias } = l {
                weight.data.iter_mut().for_each(|v| *v = 0.0);
                bias.iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }
}
