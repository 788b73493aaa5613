//! Training-time augmentation: random crop, illumination jitter, flips and
//! resize to the network input, with per-sample seeded randomness so any
//! number of workers produces the same tensors.

mod config;
mod crop;
mod flip;
mod illumination;
mod pipeline;
mod resize;

pub use config::{AugmentConfig, Range, Stage, DEFAULT_ORDER};
pub use crop::{crop, crop_side_bounds, random_crop, sample_crop, CropRect};
pub use flip::{apply_flip, random_flip, sample_flip, FlipDecision};
pub use illumination::{
    apply_illumination, illumination_jitter, quantize, sample_illumination, sample_open,
    IlluminationParams, LUMA,
};
pub use pipeline::{
    augment, augment_image, batch_count, batch_stream, epoch_order, load_eval, prepare_eval,
    prepare_sample, AugmentTrace, BatchStream, ImageBatch, StreamConfig,
};
pub use resize::{resize_bilinear, resize_to_input};
