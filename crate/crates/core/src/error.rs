use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("cannot decode image {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("invalid class catalog: {0}")]
    Catalog(String),

    #[error("missing class directory for class {class:?} (expected {dir})")]
    MissingClassDir { class: String, dir: PathBuf },

    #[error("split error: {0}")]
    Split(String),

    #[error("no outlier class configured")]
    NoOutlierClass,

    #[error("outlier directory {0} contains no images")]
    EmptyOutlierDir(PathBuf),

    #[error("degenerate image {width}x{height}: {reason}")]
    DegenerateImage {
        width: u32,
        height: u32,
        reason: &'static str,
    },

    #[error("parameter {name} = {value} outside [{low}, {high}]")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        low: f64,
        high: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("backbone error: {0}")]
    Backbone(String),

    #[error("backbone output shape mismatch: declared {declared:?}, observed {observed:?}")]
    ShapeMismatch {
        declared: Vec<usize>,
        observed: Vec<usize>,
    },

    #[error("head error: {0}")]
    Head(String),

    #[error("non-finite values in {0}")]
    NonFinite(&'static str),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
