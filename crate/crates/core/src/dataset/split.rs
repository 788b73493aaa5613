use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::catalog::ClassCatalog;
use super::scan::{list_images, DatasetManifest};
use crate::canonical;
use crate::error::{Error, Result};
use crate::raster;
use crate::rng::derive_rng;

pub const DEFAULT_FRACTIONS: Fractions = Fractions {
    train: 0.70,
    val: 0.15,
    test: 0.15,
};

pub const DEFAULT_OUTLIER_LIMIT: usize = 100;

/// Prefix that marks outlier ids; cannot collide with a class directory.
pub const OUTLIER_ID_PREFIX: &str = "@outlier/";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for Fractions {
    fn default() -> Self {
        DEFAULT_FRACTIONS
    }
}

impl Fractions {
    fn validate(&self) -> Result<()> {
        let all = [self.train, self.val, self.test];
        if all.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::Split(format!("invalid fractions {all:?}")));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Split(format!("fractions sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

/// round(fraction * n), half away from zero. The small bias absorbs binary
/// representation error in fractions such as 0.15.
pub fn share(fraction: f64, n: usize) -> usize {
    (fraction * n as f64 + 1e-9).round() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub fractions: Fractions,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Dataset,
    Outlier,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitEntry {
    pub class_index: usize,
    pub source: Source,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub dataset_root: PathBuf,
    pub outlier_root: Option<PathBuf>,
    pub catalog: ClassCatalog,
    pub split_config: SplitConfig,
    pub manifest_digest: String,
    pub entries: BTreeMap<String, SplitEntry>,
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
    pub outlier_records: Vec<String>,
}

/// A record ready to be loaded: resolved path plus label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPath {
    pub id: String,
    pub path: PathBuf,
    pub class_index: usize,
}

/// Stratified per-class split. For a class of `n` records:
/// test = round(test·n), val = round(val·n), train = the rest, taken in
/// that order from a seed-determined shuffle of the class's records.
pub fn make_splits(manifest: &DatasetManifest, fractions: Fractions, seed: u64) -> Result<SplitManifest> {
    fractions.validate()?;
    let catalog = &manifest.catalog;

    let mut by_class: Vec<Vec<&str>> = vec![Vec::new(); catalog.material_count()];
    for r in &manifest.records {
        if !catalog.is_material(r.class_index) {
            return Err(Error::Split(format!(
                "record {} has non-material label {}",
                r.id, r.class_index
            )));
        }
        by_class[r.class_index].push(&r.id);
    }

    let mut train = Vec::new();
    let mut val = Vec::new();
    let mut test = Vec::new();
    for (class_index, ids) in by_class.iter_mut().enumerate() {
        let n = ids.len();
        if n < 3 {
            return Err(Error::Split(format!(
                "class {:?} has {n} records, at least 3 required",
                catalog.name(class_index).unwrap_or("?")
            )));
        }
        ids.sort_unstable();
        let mut rng = derive_rng("split", seed, class_index as u64);
        ids.shuffle(&mut rng);
        let n_test = share(fractions.test, n);
        let n_val = share(fractions.val, n);
        if n_test + n_val > n {
            return Err(Error::Split(format!(
                "class {:?}: val+test ({}) exceed class size {n}",
                catalog.name(class_index).unwrap_or("?"),
                n_test + n_val
            )));
        }
        test.extend(ids[..n_test].iter().map(|s| s.to_string()));
        val.extend(ids[n_test..n_test + n_val].iter().map(|s| s.to_string()));
        train.extend(ids[n_test + n_val..].iter().map(|s| s.to_string()));
    }
    train.sort();
    val.sort();
    test.sort();

    let entries = manifest
        .records
        .iter()
        .map(|r| {
            (
                r.id.clone(),
                SplitEntry {
                    class_index: r.class_index,
                    source: Source::Dataset,
                },
            )
        })
        .collect();

    Ok(SplitManifest {
        dataset_root: manifest.root.clone(),
        outlier_root: None,
        catalog: catalog.clone(),
        split_config: SplitConfig { fractions, seed },
        manifest_digest: manifest.digest()?,
        entries,
        train,
        val,
        test,
        outlier_records: Vec::new(),
    })
}

/// Append outlier images (up to `limit`, by file name) to the training
/// partition under the catalog's outlier label.
pub fn attach_outliers(splits: &SplitManifest, outlier_dir: &Path, limit: Option<usize>) -> Result<SplitManifest> {
    let outlier_index = splits.catalog.outlier_index().ok_or(Error::NoOutlierClass)?;
    if !outlier_dir.is_dir() {
        return Err(Error::io(
            outlier_dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    let mut files = list_images(outlier_dir)?;
    files.retain(|f| match fs::read(f) {
        Ok(bytes) => raster::decode_rgb(&bytes, f).is_ok(),
        Err(_) => false,
    });
    if let Some(limit) = limit {
        files.truncate(limit);
    }
    if files.is_empty() {
        return Err(Error::EmptyOutlierDir(outlier_dir.to_path_buf()));
    }

    let mut out = splits.clone();
    out.outlier_root = Some(outlier_dir.to_path_buf());
    for f in files {
        let id = format!(
            "{OUTLIER_ID_PREFIX}{}",
            f.file_name().unwrap().to_string_lossy()
        );
        if out.entries.contains_key(&id) {
            continue;
        }
        out.entries.insert(
            id.clone(),
            SplitEntry {
                class_index: outlier_index,
                source: Source::Outlier,
            },
        );
        out.train.push(id.clone());
        out.outlier_records.push(id);
    }
    out.train.sort();
    out.outlier_records.sort();
    Ok(out)
}

impl SplitManifest {
    pub fn partition(&self, which: Partition) -> &[String] {
        match which {
            Partition::Train => &self.train,
            Partition::Val => &self.val,
            Partition::Test => &self.test,
        }
    }

    pub fn membership(&self, id: &str) -> Option<Partition> {
        let has = |list: &[String]| list.binary_search_by(|x| x.as_str().cmp(id)).is_ok();
        if has(&self.train) {
            Some(Partition::Train)
        } else if has(&self.val) {
            Some(Partition::Val)
        } else if has(&self.test) {
            Some(Partition::Test)
        } else {
            None
        }
    }

    pub fn resolve(&self, id: &str) -> Result<LabeledPath> {
        let entry = self
            .entries
            .get(id)
            .ok_or_else(|| Error::Split(format!("unknown record id {id}")))?;
        let path = match entry.source {
            Source::Dataset => self.dataset_root.join(id),
            Source::Outlier => {
                let root = self
                    .outlier_root
                    .as_ref()
                    .ok_or_else(|| Error::Split("outlier record without outlier root".into()))?;
                root.join(id.trim_start_matches(OUTLIER_ID_PREFIX))
            }
        };
        Ok(LabeledPath {
            id: id.to_string(),
            path,
            class_index: entry.class_index,
        })
    }

    pub fn labeled(&self, which: Partition) -> Result<Vec<LabeledPath>> {
        self.partition(which).iter().map(|id| self.resolve(id)).collect()
    }

    /// Checks the partition and outlier-isolation properties.
    pub fn check_invariants(&self) -> Result<()> {
        let train: BTreeSet<&str> = self.train.iter().map(String::as_str).collect();
        let val: BTreeSet<&str> = self.val.iter().map(String::as_str).collect();
        let test: BTreeSet<&str> = self.test.iter().map(String::as_str).collect();
        if train.len() != self.train.len() || val.len() != self.val.len() || test.len() != self.test.len() {
            return Err(Error::Split("duplicate id inside a partition".into()));
        }
        if !train.is_disjoint(&val) || !train.is_disjoint(&test) || !val.is_disjoint(&test) {
            return Err(Error::Split("partitions overlap".into()));
        }
        let all: BTreeSet<&str> = self.entries.keys().map(String::as_str).collect();
        let union: BTreeSet<&str> = train.union(&val).chain(test.iter()).copied().collect();
        if union != all {
            return Err(Error::Split("partitions do not cover every record".into()));
        }
        for id in &self.outlier_records {
            if val.contains(id.as_str()) || test.contains(id.as_str()) {
                return Err(Error::Split(format!("outlier {id} outside train")));
            }
        }
        Ok(())
    }

    pub fn to_canonical_json(&self) -> Result<String> {
        canonical::to_canonical_json(self)
    }

    pub fn digest(&self) -> Result<String> {
        canonical::canonical_digest(self)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        canonical::write_canonical_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s: SplitManifest = canonical::read_json(path)?;
        s.check_invariants()?;
        Ok(s)
    }
}
