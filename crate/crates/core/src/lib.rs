//! Construction-material image recognition.
//!
//! The pipeline ingests a class-per-directory image dataset, splits it
//! deterministically, augments training images on the fly, extracts
//! features with a frozen backbone, trains a small classifier head on
//! top, and evaluates with optional five-crop averaging.
//!
//! Modules, in pipeline order:
//!
//! - [`dataset`]: catalog, scanning, count verification, splits, outliers
//! - [`augment`]: crop / illumination / flip / resize and the batch stream
//! - [`backbone`]: frozen feature extractors (ONNX graphs or the toy one)
//! - [`head`]: trainable dense/batchnorm/dropout heads and the trainer
//! - [`inference`]: single-image and five-crop prediction
//! - [`eval`]: confusion matrices, metrics and reports
//! - [`bench`]: single-image latency measurement
//! - [`cli`]: the `matrec` command line

pub mod augment;
pub mod backbone;
pub mod bench;
pub mod canonical;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod head;
pub mod inference;
pub mod raster;
pub mod rng;

pub use error::{Error, Result};
