use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::network::{argmax, cross_entropy, infer, loss_and_grad, update_running_stats};
use super::optim::{Adam, AdamConfig};
use super::params::{build_head, HeadParams};
use super::spec::{HeadSpec, LayerSpec};
use crate::augment::{batch_stream, epoch_order, load_eval, prepare_sample, AugmentConfig, StreamConfig};
use crate::backbone::Backbone;
use crate::dataset::{LabeledPath, Partition, SplitManifest};
use crate::error::{Error, Result};
use crate::inference::material_argmax_index;
use crate::rng::derive_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: AdamConfig,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation-accuracy improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    /// Augment training images each epoch.
    pub augment: bool,
    /// Pre-compute this many augmented variants per image and cycle them
    /// instead of re-augmenting every epoch.
    pub feature_cache: Option<usize>,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: AdamConfig::with_lr(1e-3),
            batch_size: 32,
            max_epochs: 100,
            patience: 10,
            seed: 0,
            augment: true,
            feature_cache: None,
            workers: 1,
        }
    }
}

impl TrainConfig {
    /// Defaults with lr 1e-4 for heads with hidden dense layers, 1e-3 otherwise.
    pub fn for_head(spec: &HeadSpec) -> Self {
        let dense = spec
            .layers
            .iter()
            .filter(|l| matches!(l, LayerSpec::Dense { .. }))
            .count();
        let lr = if dense > 1 { 1e-4 } else { 1e-3 };
        TrainConfig {
            optimizer: AdamConfig::with_lr(lr),
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.optimizer.lr > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.patience < 1 {
            return Err(Error::Config("patience must be at least 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.max_epochs < 1 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        if self.feature_cache == Some(0) {
            return Err(Error::Config("feature cache needs at least one variant".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum StopReason {
    Patience,
    MaxEpochs,
    Diverged { epoch: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    /// 1-based; 0 when no epoch completed.
    pub best_epoch: usize,
    pub stop: StopReason,
}

impl TrainHistory {
    pub fn best(&self) -> Option<&EpochStats> {
        self.epochs.get(self.best_epoch.checked_sub(1)?)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: HeadParams,
    pub history: TrainHistory,
}

/// Keeps the first epoch with the highest validation accuracy and stops
/// once `patience` epochs pass without beating it.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best_acc: f64,
    best_epoch: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Improved,
    Continue,
    Stop,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best_acc: f64::NEG_INFINITY,
            best_epoch: 0,
        }
    }

    pub fn observe(&mut self, epoch: usize, val_acc: f64) -> Verdict {
        if val_acc > self.best_acc {
            self.best_acc = val_acc;
            self.best_epoch = epoch;
            Verdict::Improved
        } else if epoch - self.best_epoch >= self.patience {
            Verdict::Stop
        } else {
            Verdict::Continue
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

#[derive(Debug, Clone)]
pub struct FeatureBatch {
    pub features: Matrix,
    pub labels: Vec<usize>,
}

/// Training batches for a given 0-based epoch.
pub trait FeatureSource {
    fn for_each_batch(&self, epoch: u32, f: &mut dyn FnMut(FeatureBatch) -> Result<()>) -> Result<()>;
}

/// Fixed features, reshuffled every epoch.
#[derive(Debug, Clone)]
pub struct InMemoryFeatures {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub batch_size: usize,
    pub seed: u64,
}

impl FeatureSource for InMemoryFeatures {
    fn for_each_batch(&self, epoch: u32, f: &mut dyn FnMut(FeatureBatch) -> Result<()>) -> Result<()> {
        let order = epoch_order(self.labels.len(), self.seed, epoch);
        for chunk in order.chunks(self.batch_size.max(1)) {
            f(FeatureBatch {
                features: self.features.select_rows(chunk),
                labels: chunk.iter().map(|&i| self.labels[i]).collect(),
            })?;
        }
        Ok(())
    }
}

/// `K` pre-augmented feature sets; epoch `e` uses variant `e mod K`.
#[derive(Debug, Clone)]
pub struct CachedVariants {
    pub variants: Vec<Matrix>,
    pub labels: Vec<usize>,
    pub batch_size: usize,
    pub seed: u64,
}

impl FeatureSource for CachedVariants {
    fn for_each_batch(&self, epoch: u32, f: &mut dyn FnMut(FeatureBatch) -> Result<()>) -> Result<()> {
        let variant = &self.variants[epoch as usize % self.variants.len()];
        let order = epoch_order(self.labels.len(), self.seed, epoch);
        for chunk in order.chunks(self.batch_size.max(1)) {
            f(FeatureBatch {
                features: variant.select_rows(chunk),
                labels: chunk.iter().map(|&i| self.labels[i]).collect(),
            })?;
        }
        Ok(())
    }
}

/// Images streamed through augmentation and the frozen backbone.
pub struct StreamedImages<'a> {
    pub items: &'a [LabeledPath],
    pub backbone: &'a dyn Backbone,
    pub augment: &'a AugmentConfig,
    pub augment_on: bool,
    pub batch_size: usize,
    pub seed: u64,
    pub workers: usize,
}

fn to_matrix(features: &crate::backbone::FeatureTensor) -> Matrix {
    Matrix::from_f32(features.batch, features.width(), &features.data)
}

impl FeatureSource for StreamedImages<'_> {
    fn for_each_batch(&self, epoch: u32, f: &mut dyn FnMut(FeatureBatch) -> Result<()>) -> Result<()> {
        let sc = StreamConfig::new(self.batch_size, self.seed, epoch, self.augment_on).workers(self.workers);
        for batch in batch_stream(self.items, self.augment, sc)? {
            let batch = batch?;
            let features = self.backbone.features_for(&batch.images)?;
            f(FeatureBatch {
                features: to_matrix(&features),
                labels: batch.labels,
            })?;
        }
        Ok(())
    }
}

const EXTRACT_CHUNK: usize = 32;

/// Unaugmented features for every item, in item order.
pub fn eval_features(items: &[LabeledPath], backbone: &dyn Backbone, cfg: &AugmentConfig) -> Result<FeatureBatch> {
    let mut parts = Vec::new();
    for chunk in items.chunks(EXTRACT_CHUNK) {
        let images = chunk
            .par_iter()
            .map(|it| load_eval(it, cfg))
            .collect::<Result<Vec<_>>>()?;
        parts.push(to_matrix(&backbone.features_for(&images)?));
    }
    Ok(FeatureBatch {
        features: Matrix::vstack(&parts),
        labels: items.iter().map(|it| it.class_index).collect(),
    })
}

/// Augmented features for every item at a fixed epoch, in item order.
pub fn augmented_features(
    items: &[LabeledPath],
    backbone: &dyn Backbone,
    cfg: &AugmentConfig,
    seed: u64,
    epoch: u32,
) -> Result<Matrix> {
    let mut parts = Vec::new();
    for (c, chunk) in items.chunks(EXTRACT_CHUNK).enumerate() {
        let images = chunk
            .par_iter()
            .enumerate()
            .map(|(j, it)| {
                let index = (c * EXTRACT_CHUNK + j) as u32;
                prepare_sample(it, cfg, true, seed, epoch, index)
            })
            .collect::<Result<Vec<_>>>()?;
        parts.push(to_matrix(&backbone.features_for(&images)?));
    }
    Ok(Matrix::vstack(&parts))
}

/// Accuracy of plain argmax (training labels may include the outlier).
fn plain_accuracy(probs: &Matrix, labels: &[usize]) -> usize {
    labels
        .iter()
        .enumerate()
        .filter(|(i, &y)| argmax(probs.row(*i)) == y)
        .count()
}

/// Validation loss and accuracy; predictions never pick `outlier`.
pub fn evaluate_features(spec: &HeadSpec, params: &HeadParams, val: &FeatureBatch, outlier: Option<usize>) -> Result<(f64, f64)> {
    if val.labels.is_empty() {
        return Ok((0.0, 0.0));
    }
    let probs = infer(spec, params, &val.features)?;
    let loss = cross_entropy(&probs, &val.labels);
    let correct = val
        .labels
        .iter()
        .enumerate()
        .filter(|(i, &y)| material_argmax_index(probs.row(*i), outlier) == y)
        .count();
    Ok((loss, correct as f64 / val.labels.len() as f64))
}

/// The training loop over an arbitrary feature source. Single writer: only
/// this loop mutates the parameters.
pub fn fit(
    spec: &HeadSpec,
    init: HeadParams,
    train: &dyn FeatureSource,
    val: &FeatureBatch,
    outlier: Option<usize>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    init.check(spec)?;
    let mut params = init;
    let mut best = params.clone();
    let mut adam = Adam::new(cfg.optimizer)?;
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut epochs = Vec::new();
    let mut stop = StopReason::MaxEpochs;

    for epoch in 1..=cfg.max_epochs {
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        let mut seen = 0usize;
        let mut batch_index = 0u64;
        let step = train.for_each_batch((epoch - 1) as u32, &mut |batch| {
            let mut rng = derive_rng("dropout", cfg.seed, ((epoch as u64) << 32) | batch_index);
            batch_index += 1;
            let (loss, grads, cache) = loss_and_grad(spec, &params, &batch.features, &batch.labels, &mut rng)
                .map_err(|e| match e {
                    Error::NonFinite(_) => Error::Diverged { epoch },
                    other => other,
                })?;
            let n = batch.labels.len();
            loss_sum += loss * n as f64;
            correct += plain_accuracy(&cache.probs, &batch.labels);
            seen += n;
            update_running_stats(spec, &mut params, &cache);
            let grad_tensors = grads.tensors();
            adam.apply(&mut params.trainable_mut(), &grad_tensors)?;
            if !params.tensors().iter().all(|t| t.iter().all(|v| v.is_finite())) {
                return Err(Error::Diverged { epoch });
            }
            Ok(())
        });
        match step {
            Ok(()) => {}
            Err(Error::Diverged { epoch }) => {
                log::error!("training diverged at epoch {epoch}");
                stop = StopReason::Diverged { epoch };
                break;
            }
            Err(e) => return Err(e),
        }

        let (val_loss, val_acc) = evaluate_features(spec, &params, val, outlier)?;
        let stats = EpochStats {
            epoch,
            train_loss: if seen > 0 { loss_sum / seen as f64 } else { 0.0 },
            train_acc: if seen > 0 { correct as f64 / seen as f64 } else { 0.0 },
            val_loss,
            val_acc,
        };
        log::info!(
            "epoch {epoch}: loss {:.4} acc {:.4} val_loss {:.4} val_acc {:.4}",
            stats.train_loss,
            stats.train_acc,
            stats.val_loss,
            stats.val_acc
        );
        epochs.push(stats);
        match stopper.observe(epoch, val_acc) {
            Verdict::Improved => best = params.clone(),
            Verdict::Continue => {}
            Verdict::Stop => {
                stop = StopReason::Patience;
                break;
            }
        }
    }

    Ok(TrainOutcome {
        params: best,
        history: TrainHistory {
            epochs,
            best_epoch: stopper.best_epoch(),
            stop,
        },
    })
}

/// Full training run: frozen backbone features for the (augmented) train
/// partition, unaugmented validation features, early stopping on
/// validation accuracy.
pub fn train(
    spec: &HeadSpec,
    backbone: &dyn Backbone,
    splits: &SplitManifest,
    augment: &AugmentConfig,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    augment.validate()?;
    spec.validate()?;
    let catalog = &splits.catalog;
    if spec.out_classes != catalog.total_classes() {
        return Err(Error::Head(format!(
            "head has {} outputs but the catalog has {} classes",
            spec.out_classes,
            catalog.total_classes()
        )));
    }
    let flat = backbone.spec().flatten_size();
    if spec.flatten_in != flat {
        return Err(Error::Head(format!(
            "head expects {} features, backbone {} produces {flat}",
            spec.flatten_in,
            backbone.spec().name
        )));
    }
    let train_items = splits.labeled(Partition::Train)?;
    let val_items = splits.labeled(Partition::Val)?;
    if train_items.is_empty() {
        return Err(Error::Config("empty training partition".into()));
    }
    let val = eval_features(&val_items, backbone, augment)?;
    let init = build_head(spec, cfg.seed)?;
    let outlier = catalog.outlier_index();

    match cfg.feature_cache {
        Some(k) => {
            let variants = (0..k)
                .map(|e| {
                    if cfg.augment {
                        augmented_features(&train_items, backbone, augment, cfg.seed, e as u32)
                    } else {
                        eval_features(&train_items, backbone, augment).map(|b| b.features)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let source = CachedVariants {
                variants,
                labels: train_items.iter().map(|i| i.class_index).collect(),
                batch_size: cfg.batch_size,
                seed: cfg.seed,
            };
            fit(spec, init, &source, &val, outlier, cfg)
        }
        None => {
            let source = StreamedImages {
                items: &train_items,
                backbone,
                augment,
                augment_on: cfg.augment,
                batch_size: cfg.batch_size,
                seed: cfg.seed,
                workers: cfg.workers,
            };
            fit(spec, init, &source, &val, outlier, cfg)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn early_stopping_on_flat_accuracy() {
        let mut s = EarlyStopping::new(10);
        let mut stopped = None;
        for epoch in 1..=100 {
            if s.observe(epoch, 0.5) == Verdict::Stop {
                stopped = Some(epoch);
                break;
            }
        }
        assert_eq!(stopped, Some(11));
        assert_eq!(s.best_epoch(), 1);
    }

    #[test]
    fn early_stopping_resets_on_improvement() {
        let mut s = EarlyStopping::new(2);
        assert_eq!(s.observe(1, 0.1), Verdict::Improved);
        assert_eq!(s.observe(2, 0.1), Verdict::Continue);
        assert_eq!(s.observe(3, 0.2), Verdict::Improved);
        assert_eq!(s.observe(4, 0.2), Verdict::Continue);
        assert_eq!(s.observe(5, 0.15), Verdict::Stop);
        assert_eq!(s.best_epoch(), 3);
    }

    #[test]
    fn default_learning_rates() {
        let vgg = HeadSpec::canonical("vgg16").unwrap();
        let res = HeadSpec::canonical("resnet152").unwrap();
        assert_eq!(TrainConfig::for_head(&vgg).optimizer.lr, 1e-4);
        assert_eq!(TrainConfig::for_head(&res).optimizer.lr, 1e-3);
        assert!(TrainConfig { patience: 0, ..TrainConfig::default() }.validate().is_err());
    }
}
