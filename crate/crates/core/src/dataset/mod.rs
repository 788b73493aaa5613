//! Dataset ingestion, count verification and deterministic splits.

mod catalog;
mod scan;
mod split;

pub use catalog::{
    dir_name, published_counts, ClassCatalog, ClassEntry, DEFAULT_OUTLIER_NAME, PUBLISHED_COUNTS,
    PUBLISHED_TOTAL,
};
pub use scan::{
    scan_dataset, verify_counts, CountReport, CountRow, DatasetManifest, ImageRecord, SkippedFile,
    MIN_SIDE,
};
pub use split::{
    attach_outliers, make_splits, share, Fractions, LabeledPath, Partition, Source, SplitConfig,
    SplitEntry, SplitManifest, DEFAULT_FRACTIONS, DEFAULT_OUTLIER_LIMIT, OUTLIER_ID_PREFIX,
};
