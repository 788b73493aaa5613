use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::catalog::ClassCatalog;
use crate::canonical;
use crate::error::{Error, Result};
use crate::raster;

/// Smallest side accepted for a dataset original.
pub const MIN_SIDE: u32 = 224;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRecord {
    /// Path relative to the dataset root, `/`-separated. Unique.
    pub id: String,
    pub class_index: usize,
    pub width: u32,
    pub height: u32,
    pub sha256: String,
    pub digest64: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub catalog: ClassCatalog,
    /// Sorted by id.
    pub records: Vec<ImageRecord>,
    pub per_class_counts: BTreeMap<String, usize>,
    pub skipped: Vec<SkippedFile>,
}

impl DatasetManifest {
    pub fn from_records(
        root: PathBuf,
        catalog: ClassCatalog,
        mut records: Vec<ImageRecord>,
        mut skipped: Vec<SkippedFile>,
    ) -> Self {
        records.sort_by(|a, b| a.id.cmp(&b.id));
        skipped.sort_by(|a, b| a.id.cmp(&b.id));
        let per_class_counts = count_per_class(&catalog, &records);
        DatasetManifest {
            root,
            catalog,
            records,
            per_class_counts,
            skipped,
        }
    }

    pub fn total(&self) -> usize {
        self.records.len()
    }

    pub fn path_of(&self, record: &ImageRecord) -> PathBuf {
        self.root.join(&record.id)
    }

    /// Drop a record and recompute the per-class counts.
    pub fn remove_record(&mut self, id: &str) -> Option<ImageRecord> {
        let pos = self.records.iter().position(|r| r.id == id)?;
        let removed = self.records.remove(pos);
        self.per_class_counts = count_per_class(&self.catalog, &self.records);
        Some(removed)
    }

    pub fn digest(&self) -> Result<String> {
        canonical::canonical_digest(self)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        canonical::write_canonical_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        canonical::read_json(path)
    }
}

fn count_per_class(catalog: &ClassCatalog, records: &[ImageRecord]) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> = catalog
        .materials()
        .iter()
        .map(|e| (e.name.clone(), 0))
        .collect();
    for r in records {
        if let Some(name) = catalog.name(r.class_index) {
            *counts.entry(name.to_string()).or_insert(0) += 1;
        }
    }
    counts
}

/// Image files directly inside `dir`, sorted by file name.
pub(crate) fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let hidden = path
            .file_name()
            .and_then(|n| n.to_str())
            .map(|n| n.starts_with('.'))
            .unwrap_or(true);
        if !hidden && path.is_file() && raster::has_image_extension(&path) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub(crate) enum Probe {
    Ok { width: u32, height: u32, sha256: String, digest64: String },
    Skip(String),
}

pub(crate) fn probe_file(path: &Path) -> Result<Probe> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let img = match raster::decode_rgb(&bytes, path) {
        Ok(img) => img,
        Err(e) => return Ok(Probe::Skip(e.to_string())),
    };
    let (width, height) = img.dimensions();
    if width < MIN_SIDE || height < MIN_SIDE {
        return Ok(Probe::Skip(format!(
            "image {width}x{height} is smaller than {MIN_SIDE}x{MIN_SIDE}"
        )));
    }
    Ok(Probe::Ok {
        width,
        height,
        sha256: canonical::sha256_hex(&bytes),
        digest64: format!("{:016x}", canonical::digest64(&bytes)),
    })
}

/// Walk `root/<class-dir>/` for every material class and record each
/// decodable image. Undecodable or undersized files go to the skip list.
pub fn scan_dataset(root: &Path, catalog: &ClassCatalog) -> Result<DatasetManifest> {
    let mut jobs = Vec::new();
    for (index, entry) in catalog.materials().iter().enumerate() {
        let dir = root.join(&entry.dir);
        if !dir.is_dir() {
            return Err(Error::MissingClassDir {
                class: entry.name.clone(),
                dir,
            });
        }
        for file in list_images(&dir)? {
            let id = format!(
                "{}/{}",
                entry.dir,
                file.file_name().unwrap().to_string_lossy()
            );
            jobs.push((index, id, file));
        }
    }

    let probed: Vec<(usize, String, Probe)> = jobs
        .into_par_iter()
        .map(|(index, id, file)| probe_file(&file).map(|p| (index, id, p)))
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (class_index, id, probe) in probed {
        match probe {
            Probe::Ok { width, height, sha256, digest64 } => records.push(ImageRecord {
                id,
                class_index,
                width,
                height,
                sha256,
                digest64,
            }),
            Probe::Skip(reason) => {
                log::warn!("skipping {id}: {reason}");
                skipped.push(SkippedFile { id, reason });
            }
        }
    }
    Ok(DatasetManifest::from_records(
        root.to_path_buf(),
        catalog.clone(),
        records,
        skipped,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub class: String,
    pub expected: Option<usize>,
    pub found: usize,
    pub delta: i64,
    /// Present in the manifest but absent from the expected map.
    pub unexpected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    pub rows: Vec<CountRow>,
    pub expected_total: usize,
    pub found_total: usize,
    pub pass: bool,
}

pub fn verify_counts(manifest: &DatasetManifest, expected: &BTreeMap<String, usize>) -> CountReport {
    let mut rows = Vec::new();
    for (class, &found) in &manifest.per_class_counts {
        match expected.get(class) {
            Some(&exp) => rows.push(CountRow {
                class: class.clone(),
                expected: Some(exp),
                found,
                delta: found as i64 - exp as i64,
                unexpected: false,
            }),
            None => rows.push(CountRow {
                class: class.clone(),
                expected: None,
                found,
                delta: found as i64,
                unexpected: true,
            }),
        }
    }
    for (class, &exp) in expected {
        if !manifest.per_class_counts.contains_key(class) {
            rows.push(CountRow {
                class: class.clone(),
                expected: Some(exp),
                found: 0,
                delta: -(exp as i64),
                unexpected: false,
            });
        }
    }
    let pass = rows.iter().all(|r| r.delta == 0 && !r.unexpected);
    CountReport {
        rows,
        expected_total: expected.values().sum(),
        found_total: manifest.total(),
        pass,
    }
}

impl CountReport {
    pub fn row(&self, class: &str) -> Option<&CountRow> {
        self.rows.iter().find(|r| r.class == class)
    }
}
