//! Trainable classifier heads on top of frozen backbone features.

mod checkpoint;
mod matrix;
mod network;
mod optim;
mod params;
mod spec;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, MAGIC, VERSION};
pub use matrix::Matrix;
pub use network::{
    argmax, backward, cross_entropy, forward, infer, loss_and_grad, softmax_rows,
    update_running_stats, BatchNormCache, ForwardCache, Grads, LayerGrads, Mode, LOG_CLAMP,
};
pub use optim::{Adam, AdamConfig};
pub use params::{build_head, snap, HeadParams, LayerParams};
pub use spec::{HeadSpec, LayerSpec, BN_EPSILON, BN_MOMENTUM, CANONICAL_HEADS};
pub use train::{
    augmented_features, eval_features, evaluate_features, fit, train, CachedVariants,
    EarlyStopping, EpochStats, FeatureBatch, FeatureSource, InMemoryFeatures, StopReason,
    StreamedImages, TrainConfig, TrainHistory, TrainOutcome, Verdict,
};
