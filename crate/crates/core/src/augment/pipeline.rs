use std::sync::mpsc::{sync_channel, Receiver};
use std::sync::Arc;
use std::thread::JoinHandle;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{AugmentConfig, Stage};
use super::crop::{random_crop, CropRect};
use super::flip::{apply_flip, sample_flip, FlipDecision};
use super::illumination::{apply_illumination, sample_illumination, IlluminationParams};
use super::resize::resize_to_input;
use crate::dataset::LabeledPath;
use crate::error::{Error, Result};
use crate::raster::{self, RgbImage};
use crate::rng::{derive_rng, SampleRng};

/// The random decisions taken for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AugmentTrace {
    pub crop: Option<CropRect>,
    pub illumination: Option<IlluminationParams>,
    pub flip: Option<FlipDecision>,
}

/// Applies the configured stages to one decoded original. Pure in
/// `(img, cfg, sample)`.
pub fn augment_image(img: &RgbImage, cfg: &AugmentConfig, sample: SampleRng) -> Result<(RgbImage, AugmentTrace)> {
    let mut rng = sample.stream();
    let mut trace = AugmentTrace::default();
    let mut cur = img.clone();
    for stage in &cfg.pipeline_order {
        match stage {
            Stage::Crop => {
                let (out, rect) = random_crop(&cur, cfg.crop_fraction_range, &mut rng)?;
                trace.crop = Some(rect);
                cur = out;
            }
            Stage::Illumination => {
                let p = sample_illumination(cfg, &mut rng);
                trace.illumination = Some(p);
                cur = apply_illumination(&cur, p);
            }
            Stage::Flip => {
                let f = sample_flip(cfg.flip_prob_per_axis, &mut rng);
                trace.flip = Some(f);
                cur = apply_flip(&cur, f);
            }
            Stage::Resize => cur = resize_to_input(&cur, cfg.input_side),
        }
    }
    Ok((cur, trace))
}

/// Evaluation path: plain resize, no randomness.
pub fn prepare_eval(img: &RgbImage, cfg: &AugmentConfig) -> RgbImage {
    resize_to_input(img, cfg.input_side)
}

fn named(path: &std::path::Path, e: Error) -> Error {
    match e {
        Error::Decode { .. } | Error::Io { .. } => e,
        other => Error::Decode {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    }
}

/// Loads the record and runs [`augment_image`] with `SampleRng(seed, epoch, index)`.
pub fn augment(record: &LabeledPath, cfg: &AugmentConfig, seed: u64, epoch: u32, index: u32) -> Result<RgbImage> {
    let img = raster::load_rgb(&record.path)?;
    augment_image(&img, cfg, SampleRng::new(seed, epoch, index))
        .map(|(out, _)| out)
        .map_err(|e| named(&record.path, e))
}

pub fn load_eval(record: &LabeledPath, cfg: &AugmentConfig) -> Result<RgbImage> {
    Ok(prepare_eval(&raster::load_rgb(&record.path)?, cfg))
}

/// Sample for position `index` of a partition: augmented or plain resize.
pub fn prepare_sample(record: &LabeledPath, cfg: &AugmentConfig, augment_on: bool, seed: u64, epoch: u32, index: u32) -> Result<RgbImage> {
    if augment_on {
        augment(record, cfg, seed, epoch, index)
    } else {
        load_eval(record, cfg)
    }
}

/// Seed-determined visiting order of a partition for one epoch.
pub fn epoch_order(n: usize, seed: u64, epoch: u32) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut derive_rng("batch-order", seed, u64::from(epoch)));
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamConfig {
    pub batch_size: usize,
    pub seed: u64,
    pub epoch: u32,
    pub augment: bool,
    pub workers: usize,
    /// Bound on batches produced ahead of the consumer.
    pub queue_capacity: usize,
}

impl StreamConfig {
    pub fn new(batch_size: usize, seed: u64, epoch: u32, augment: bool) -> Self {
        StreamConfig {
            batch_size,
            seed,
            epoch,
            augment,
            workers: 1,
            queue_capacity: 2,
        }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageBatch {
    pub images: Vec<RgbImage>,
    pub labels: Vec<usize>,
    /// Positions within the partition.
    pub indices: Vec<usize>,
}

impl ImageBatch {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

pub fn batch_count(n: usize, batch_size: usize) -> usize {
    n.div_ceil(batch_size)
}

/// Bounded producer/consumer stream of image batches for one epoch.
///
/// A producer thread fills a queue of at most `queue_capacity` batches;
/// samples inside a batch are prepared on a pool of `workers` threads.
/// Contents and order depend only on `(items, cfg, seed, epoch)`.
pub struct BatchStream {
    rx: Receiver<Result<ImageBatch>>,
    handle: Option<JoinHandle<()>>,
    remaining: usize,
}

pub fn batch_stream(items: &[LabeledPath], cfg: &AugmentConfig, sc: StreamConfig) -> Result<BatchStream> {
    if sc.batch_size < 1 {
        return Err(Error::Config("batch_size must be at least 1".into()));
    }
    if items.is_empty() {
        return Err(Error::Config("cannot stream an empty partition".into()));
    }
    let items: Arc<Vec<LabeledPath>> = Arc::new(items.to_vec());
    let cfg = cfg.clone();
    let order = epoch_order(items.len(), sc.seed, sc.epoch);
    let total = batch_count(items.len(), sc.batch_size);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sc.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let (tx, rx) = sync_channel(sc.queue_capacity.max(1));

    let handle = std::thread::spawn(move || {
        for chunk in order.chunks(sc.batch_size) {
            let prepared: Result<Vec<RgbImage>> = pool.install(|| {
                chunk
                    .par_iter()
                    .map(|&i| prepare_sample(&items[i], &cfg, sc.augment, sc.seed, sc.epoch, i as u32))
                    .collect()
            });
            let batch = prepared.map(|images| ImageBatch {
                images,
                labels: chunk.iter().map(|&i| items[i].class_index).collect(),
                indices: chunk.to_vec(),
            });
            let failed = batch.is_err();
            if tx.send(batch).is_err() || failed {
                break;
            }
        }
    });

    Ok(BatchStream {
        rx,
        handle: Some(handle),
        remaining: total,
    })
}

impl Iterator for BatchStream {
    type Item = Result<ImageBatch>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        match self.rx.recv() {
            Ok(batch) => {
                self.remaining = if batch.is_err() { 0 } else { self.remaining - 1 };
                Some(batch)
            }
            Err(_) => {
                self.remaining = 0;
                None
            }
        }
    }
}

impl Drop for BatchStream {
    fn drop(&mut self) {
        // Unblock a producer waiting on a full queue before joining it.
        let (_, dead) = sync_channel(1);
        drop(std::mem::replace(&mut self.rx, dead));
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}
