use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{Error, Result};

pub const INPUT_SIDE: u32 = 224;
pub const FEATURE_GRID: usize = 7;

/// Backbone families with a published "no-top" output shape.
///
/// `reference_frozen_fraction` is the share of trunk weights the original
/// training kept fixed; here every trunk is fully frozen.
pub const KNOWN_BACKBONES: [(&str, usize, Option<f64>); 4] = [
    ("vgg16", 512, Some(1.0)),
    ("resnet152", 2048, Some(0.71)),
    ("densenet121", 1024, Some(0.54)),
    ("nasnet-mobile", 1056, Some(0.06)),
];

pub const TOY_NAME: &str = "toy";

pub fn known_channels(name: &str) -> Option<usize> {
    KNOWN_BACKBONES
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, c, _)| *c)
}

pub fn reference_frozen_fraction(name: &str) -> Option<f64> {
    KNOWN_BACKBONES
        .iter()
        .find(|(n, _, _)| *n == name)
        .and_then(|(_, _, f)| *f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelOrder {
    #[serde(rename = "RGB")]
    Rgb,
    #[serde(rename = "BGR")]
    Bgr,
}

/// `out = (x * scale - mean) / std` per channel, after reordering channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub scale: f64,
    pub mean: [f64; 3],
    pub std: [f64; 3],
    pub channel_order: ChannelOrder,
}

impl Preprocessing {
    pub const IDENTITY: Preprocessing = Preprocessing {
        scale: 1.0,
        mean: [0.0; 3],
        std: [1.0; 3],
        channel_order: ChannelOrder::Rgb,
    };

    /// Maps [0, 255] onto [-1, 1].
    pub const SYMMETRIC: Preprocessing = Preprocessing {
        scale: 1.0 / 255.0,
        mean: [0.5; 3],
        std: [0.5; 3],
        channel_order: ChannelOrder::Rgb,
    };

    pub fn validate(&self) -> Result<()> {
        let finite = self.scale.is_finite()
            && self.mean.iter().all(|m| m.is_finite())
            && self.std.iter().all(|s| s.is_finite() && *s > 0.0);
        if !finite {
            return Err(Error::Backbone(format!(
                "preprocessing recipe not fully populated: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Identity and contract of a frozen feature extractor. Serialized form is
/// the external manifest (`NAME.manifest.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackboneSpec {
    pub name: String,
    pub input_side: u32,
    pub output_shape: [usize; 3],
    pub preprocessing: Preprocessing,
    pub opset: Option<i64>,
    #[serde(default)]
    pub source_note: String,
    /// Seed of the built-in toy extractor; absent for graph backbones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toy_seed: Option<u64>,
}

impl BackboneSpec {
    pub fn channels(&self) -> usize {
        self.output_shape[2]
    }

    pub fn flatten_size(&self) -> usize {
        self.output_shape.iter().product()
    }

    /// Always 1.0: trunks are fully frozen.
    pub fn applied_frozen_fraction(&self) -> f64 {
        1.0
    }

    pub fn reference_frozen_fraction(&self) -> Option<f64> {
        reference_frozen_fraction(&self.name)
    }

    pub fn validate(&self) -> Result<()> {
        self.preprocessing.validate()?;
        if self.input_side != INPUT_SIDE {
            return Err(Error::Backbone(format!(
                "input side {} unsupported, expected {INPUT_SIDE}",
                self.input_side
            )));
        }
        let [h, w, c] = self.output_shape;
        if h != FEATURE_GRID || w != FEATURE_GRID || c == 0 {
            return Err(Error::Backbone(format!(
                "output shape {:?} is not ({FEATURE_GRID}, {FEATURE_GRID}, C)",
                self.output_shape
            )));
        }
        if let Some(expected) = known_channels(&self.name) {
            if c != expected {
                return Err(Error::ShapeMismatch {
                    declared: self.output_shape.to_vec(),
                    observed: vec![FEATURE_GRID, FEATURE_GRID, expected],
                });
            }
        }
        if self.opset.is_none() && self.toy_seed.is_none() {
            return Err(Error::Backbone(format!(
                "manifest for {} does not pin an opset",
                self.name
            )));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let spec: BackboneSpec = canonical::read_json(path)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        canonical::write_canonical_json(path, self)
    }
}
