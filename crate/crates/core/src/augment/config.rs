use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed-open sampling interval `(low, high)`; validated as `0 < low <= high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub low: f64,
    pub high: f64,
}

impl Range {
    pub const fn new(low: f64, high: f64) -> Self {
        Range { low, high }
    }

    pub fn contains_open(&self, x: f64) -> bool {
        x > self.low && x < self.high
    }

    pub fn contains_closed(&self, x: f64) -> bool {
        x >= self.low && x <= self.high
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.low.is_finite() && self.high.is_finite() && self.low > 0.0 && self.low <= self.high) {
            return Err(Error::Config(format!(
                "{name} range ({}, {}) must satisfy 0 < low <= high",
                self.low, self.high
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Crop,
    Illumination,
    Flip,
    Resize,
}

pub const DEFAULT_ORDER: [Stage; 4] = [Stage::Crop, Stage::Illumination, Stage::Flip, Stage::Resize];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    /// Crop side as a fraction of the original side, per dimension.
    pub crop_fraction_range: Range,
    pub contrast_range: Range,
    pub gamma_range: Range,
    pub saturation_range: Range,
    pub flip_prob_per_axis: f64,
    pub input_side: u32,
    pub pipeline_order: Vec<Stage>,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            crop_fraction_range: Range::new(0.5, 1.0),
            contrast_range: Range::new(0.3, 1.0),
            gamma_range: Range::new(0.5, 5.0),
            saturation_range: Range::new(0.7, 1.0),
            flip_prob_per_axis: 0.25,
            input_side: 224,
            pipeline_order: DEFAULT_ORDER.to_vec(),
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        self.crop_fraction_range.validate("crop fraction")?;
        if self.crop_fraction_range.high > 1.0 {
            return Err(Error::Config("crop fraction cannot exceed 1".into()));
        }
        self.contrast_range.validate("contrast")?;
        self.gamma_range.validate("gamma")?;
        self.saturation_range.validate("saturation")?;
        if !(0.0..=1.0).contains(&self.flip_prob_per_axis) {
            return Err(Error::Config(format!(
                "flip probability {} outside [0, 1]",
                self.flip_prob_per_axis
            )));
        }
        if self.input_side < 1 {
            return Err(Error::Config("input_side must be at least 1".into()));
        }
        let mut seen = Vec::new();
        for s in &self.pipeline_order {
            if seen.contains(s) {
                return Err(Error::Config(format!("stage {s:?} listed twice")));
            }
            seen.push(*s);
        }
        if self.pipeline_order.last() != Some(&Stage::Resize) {
            return Err(Error::Config("resize must be the last pipeline stage".into()));
        }
        Ok(())
    }
}
