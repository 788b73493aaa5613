use serde::{Deserialize, Serialize};

use crate::backbone::{known_channels, FEATURE_GRID};
use crate::error::{Error, Result};

pub const BN_MOMENTUM: f64 = 0.99;
pub const BN_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum LayerSpec {
    Dropout { rate: f64 },
    Dense { units: usize },
    BatchNorm { momentum: f64, epsilon: f64 },
    Relu,
    Softmax,
}

impl LayerSpec {
    pub fn batchnorm() -> Self {
        LayerSpec::BatchNorm {
            momentum: BN_MOMENTUM,
            epsilon: BN_EPSILON,
        }
    }
}

/// Layer stack applied to flattened backbone features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadSpec {
    pub name: String,
    pub flatten_in: usize,
    pub layers: Vec<LayerSpec>,
    pub out_classes: usize,
}

/// Heads named after the trunk they sit on.
pub const CANONICAL_HEADS: [&str; 4] = ["vgg16", "resnet152", "densenet121", "nasnet-mobile"];

impl HeadSpec {
    /// dropout 0.3 -> [dense w -> batchnorm -> relu -> dropout r] x2 -> dense k -> softmax,
    /// with dropout rates 0.3 then 0.5 after the two hidden blocks.
    pub fn two_block(name: &str, flatten_in: usize, hidden: [usize; 2], out_classes: usize) -> Self {
        HeadSpec {
            name: name.to_string(),
            flatten_in,
            layers: vec![
                LayerSpec::Dropout { rate: 0.3 },
                LayerSpec::Dense { units: hidden[0] },
                LayerSpec::batchnorm(),
                LayerSpec::Relu,
                LayerSpec::Dropout { rate: 0.3 },
                LayerSpec::Dense { units: hidden[1] },
                LayerSpec::batchnorm(),
                LayerSpec::Relu,
                LayerSpec::Dropout { rate: 0.5 },
                LayerSpec::Dense { units: out_classes },
                LayerSpec::Softmax,
            ],
            out_classes,
        }
    }

    /// dropout 0.5 -> dense k -> softmax.
    pub fn single_dense(name: &str, flatten_in: usize, out_classes: usize) -> Self {
        HeadSpec {
            name: name.to_string(),
            flatten_in,
            layers: vec![
                LayerSpec::Dropout { rate: 0.5 },
                LayerSpec::Dense { units: out_classes },
                LayerSpec::Softmax,
            ],
            out_classes,
        }
    }

    /// The four published heads at their published sizes.
    pub fn canonical(name: &str) -> Result<Self> {
        let channels = known_channels(name)
            .ok_or_else(|| Error::Head(format!("no canonical head named {name:?}")))?;
        let flat = FEATURE_GRID * FEATURE_GRID * channels;
        Ok(match name {
            "vgg16" => Self::two_block(name, flat, [1024, 1024], 11),
            "resnet152" => Self::single_dense(name, flat, 11),
            _ => Self::single_dense(name, flat, 12),
        })
    }

    /// Head of the given style sized for a backbone and catalog.
    /// Styles: "two-block" (the vgg16 structure), "single-dense".
    pub fn for_features(style: &str, flatten_in: usize, out_classes: usize) -> Result<Self> {
        match style {
            "two-block" | "vgg16" => Ok(Self::two_block(style, flatten_in, [1024, 1024], out_classes)),
            "single-dense" | "resnet152" | "densenet121" | "nasnet-mobile" => {
                Ok(Self::single_dense(style, flatten_in, out_classes))
            }
            other => Err(Error::Head(format!("unknown head style {other:?}"))),
        }
    }

    /// Checks that layer widths chain and the stack ends in
    /// `dense(out_classes) -> softmax`.
    pub fn validate(&self) -> Result<()> {
        if self.flatten_in == 0 {
            return Err(Error::Head("flatten_in must be positive".into()));
        }
        let mut width = self.flatten_in;
        let mut last_dense = None;
        for (i, layer) in self.layers.iter().enumerate() {
            match *layer {
                LayerSpec::Dropout { rate } => {
                    if !(0.0..1.0).contains(&rate) {
                        return Err(Error::Head(format!("layer {i}: dropout rate {rate} outside [0, 1)")));
                    }
                }
                LayerSpec::Dense { units } => {
                    if units == 0 {
                        return Err(Error::Head(format!("layer {i}: dense with zero units")));
                    }
                    width = units;
                    last_dense = Some(i);
                }
                LayerSpec::BatchNorm { momentum, epsilon } => {
                    if !(0.0..1.0).contains(&momentum) || epsilon <= 0.0 {
                        return Err(Error::Head(format!("layer {i}: bad batchnorm settings")));
                    }
                    if last_dense.is_none() {
                        return Err(Error::Head(format!("layer {i}: batchnorm before any dense layer")));
                    }
                }
                LayerSpec::Relu => {}
                LayerSpec::Softmax => {
                    if i + 1 != self.layers.len() {
                        return Err(Error::Head("softmax must be the final layer".into()));
                    }
                }
            }
        }
        if self.layers.last() != Some(&LayerSpec::Softmax) {
            return Err(Error::Head("head must end with softmax".into()));
        }
        if width != self.out_classes {
            return Err(Error::Head(format!(
                "final width {width} does not match out_classes {}",
                self.out_classes
            )));
        }
        Ok(())
    }

    /// Input width of each layer.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = self.flatten_in;
        self.layers
            .iter()
            .map(|l| {
                let input = w;
                if let LayerSpec::Dense { units } = l {
                    w = *units;
                }
                input
            })
            .collect()
    }

    /// Dense weights and biases plus four per-unit batchnorm vectors.
    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .zip(self.widths())
            .map(|(l, w)| match l {
                LayerSpec::Dense { units } => w * units + units,
                LayerSpec::BatchNorm { .. } => 4 * w,
                _ => 0,
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_heads_validate() {
        for name in CANONICAL_HEADS {
            HeadSpec::canonical(name).unwrap().validate().unwrap();
        }
        assert_eq!(HeadSpec::canonical("densenet121").unwrap().out_classes, 12);
        assert_eq!(HeadSpec::canonical("nasnet-mobile").unwrap().flatten_in, 51744);
    }

    #[test]
    fn dim_chain_mismatch_is_rejected() {
        let mut spec = HeadSpec::single_dense("x", 10, 3);
        spec.out_classes = 4;
        assert!(spec.validate().is_err());
        let mut spec = HeadSpec::single_dense("x", 10, 3);
        spec.layers.swap(1, 2);
        assert!(spec.validate().is_err());
    }
}
