//! Frozen feature extractors.
//!
//! A [`Backbone`] maps a preprocessed `[N, 224, 224, 3]` batch to
//! `[N, 7, 7, C]` features and never changes after construction.

mod onnx;
mod spec;
mod tensor;
mod toy;

use std::path::Path;
use std::sync::Arc;

pub use onnx::{
    default_manifest_path, export_toy, graph_opset, load_backbone,
    toy_model_proto, OnnxBackbone,
};
pub use spec::{
    known_channels, reference_frozen_fraction, BackboneSpec, ChannelOrder, Preprocessing,
    FEATURE_GRID, INPUT_SIDE, KNOWN_BACKBONES, TOY_NAME,
};
pub use tensor::{preprocess, FeatureTensor, InputBatch};
pub use toy::ToyBackbone;

use crate::error::Result;
use crate::raster::RgbImage;

pub trait Backbone: Send + Sync {
    fn spec(&self) -> &BackboneSpec;

    fn extract(&self, batch: &InputBatch) -> Result<FeatureTensor>;

    /// Preprocess with the backbone's own recipe, then extract.
    fn features_for(&self, images: &[RgbImage]) -> Result<FeatureTensor> {
        let batch = preprocess(images, &self.spec().preprocessing)?;
        self.extract(&batch)
    }
}

pub type BackboneHandle = Arc<dyn Backbone>;

pub fn toy_backbone(seed: u64, channels: usize) -> Result<BackboneHandle> {
    Ok(Arc::new(ToyBackbone::new(seed, channels)?))
}

/// Graph-backed when `graph` is given, otherwise the toy extractor
/// described by `spec` (which must carry a toy seed).
pub fn open_backbone(graph: Option<&Path>, manifest: Option<&Path>, spec: Option<&BackboneSpec>) -> Result<BackboneHandle> {
    match graph {
        Some(g) => {
            let m = manifest
                .map(Path::to_path_buf)
                .unwrap_or_else(|| default_manifest_path(g));
            Ok(Arc::new(load_backbone(g, &m)?))
        }
        None => {
            let spec = spec.ok_or_else(|| {
                crate::Error::Backbone("no graph given and no toy backbone configured".into())
            })?;
            Ok(Arc::new(ToyBackbone::from_spec(spec)?))
        }
    }
}
