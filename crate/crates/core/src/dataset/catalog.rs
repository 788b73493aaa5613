use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{Error, Result};

/// The eleven material classes and their published image counts, in
/// catalog order.
pub const PUBLISHED_COUNTS: [(&str, usize); 11] = [
    ("Sandstorm", 146),
    ("Paving", 140),
    ("Gravel", 81),
    ("Stone", 180),
    ("Cement-Granular", 118),
    ("Brick", 179),
    ("Soil-Vegetation", 70),
    ("Wood", 53),
    ("Asphalt", 86),
    ("Clay Hollow Block", 76),
    ("Concrete Block", 102),
];

pub const PUBLISHED_TOTAL: usize = 1231;

pub const DEFAULT_OUTLIER_NAME: &str = "Outlier";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub name: String,
    /// Subdirectory under the dataset root holding this class's images.
    pub dir: String,
}

impl ClassEntry {
    pub fn new(name: &str) -> Self {
        ClassEntry {
            name: name.to_string(),
            dir: dir_name(name),
        }
    }
}

/// Lower-case, spaces to hyphens: "Clay Hollow Block" -> "clay-hollow-block".
pub fn dir_name(name: &str) -> String {
    name.trim()
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join("-")
}

/// Ordered material classes plus an optional trailing outlier class.
///
/// Material `i` has label index `i`; the outlier, when present, is always
/// the last label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCatalog {
    materials: Vec<ClassEntry>,
    outlier: Option<String>,
}

impl ClassCatalog {
    pub fn new(materials: Vec<ClassEntry>, outlier: Option<String>) -> Result<Self> {
        let catalog = ClassCatalog { materials, outlier };
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn from_names(names: &[&str], with_outlier: bool) -> Result<Self> {
        Self::new(
            names.iter().map(|n| ClassEntry::new(n)).collect(),
            with_outlier.then(|| DEFAULT_OUTLIER_NAME.to_string()),
        )
    }

    /// The eleven published material classes.
    pub fn published(with_outlier: bool) -> Self {
        let names: Vec<&str> = PUBLISHED_COUNTS.iter().map(|(n, _)| *n).collect();
        Self::from_names(&names, with_outlier).expect("published catalog is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let catalog: ClassCatalog = canonical::read_json(path)?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.materials.is_empty() {
            return Err(Error::Catalog("no material classes".into()));
        }
        let mut names = HashSet::new();
        let mut dirs = HashSet::new();
        for entry in &self.materials {
            if entry.name.trim().is_empty() || entry.dir.trim().is_empty() {
                return Err(Error::Catalog("empty class name or directory".into()));
            }
            if !names.insert(entry.name.as_str()) {
                return Err(Error::Catalog(format!("duplicate class {:?}", entry.name)));
            }
            if !dirs.insert(entry.dir.as_str()) {
                return Err(Error::Catalog(format!("duplicate directory {:?}", entry.dir)));
            }
        }
        if let Some(outlier) = &self.outlier {
            if names.contains(outlier.as_str()) {
                return Err(Error::Catalog(format!(
                    "outlier name {outlier:?} collides with a material class"
                )));
            }
        }
        Ok(())
    }

    pub fn materials(&self) -> &[ClassEntry] {
        &self.materials
    }

    pub fn material_count(&self) -> usize {
        self.materials.len()
    }

    pub fn total_classes(&self) -> usize {
        self.materials.len() + usize::from(self.outlier.is_some())
    }

    pub fn outlier_index(&self) -> Option<usize> {
        self.outlier.as_ref().map(|_| self.materials.len())
    }

    pub fn outlier_name(&self) -> Option<&str> {
        self.outlier.as_deref()
    }

    pub fn has_outlier(&self) -> bool {
        self.outlier.is_some()
    }

    pub fn is_material(&self, index: usize) -> bool {
        index < self.materials.len()
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        if index < self.materials.len() {
            Some(&self.materials[index].name)
        } else if Some(index) == self.outlier_index() {
            self.outlier.as_deref()
        } else {
            None
        }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.materials
            .iter()
            .position(|e| e.name == name)
            .or_else(|| (self.outlier.as_deref() == Some(name)).then(|| self.materials.len()))
    }

    pub fn material_names(&self) -> Vec<String> {
        self.materials.iter().map(|e| e.name.clone()).collect()
    }

    pub fn without_outlier(&self) -> Self {
        ClassCatalog {
            materials: self.materials.clone(),
            outlier: None,
        }
    }
}

/// Published per-class counts keyed by class name.
pub fn published_counts() -> BTreeMap<String, usize> {
    PUBLISHED_COUNTS
        .iter()
        .map(|(n, c)| (n.to_string(), *c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_counts_sum_to_total() {
        let sum: usize = PUBLISHED_COUNTS.iter().map(|(_, c)| c).sum();
        assert_eq!(sum, PUBLISHED_TOTAL);
    }

    #[test]
    fn outlier_is_last() {
        let c = ClassCatalog::published(true);
        assert_eq!(c.total_classes(), 12);
        assert_eq!(c.outlier_index(), Some(11));
        assert_eq!(c.name(11), Some(DEFAULT_OUTLIER_NAME));
        assert_eq!(c.index_of("Stone"), Some(3));
        assert!(!c.is_material(11));

        let plain = ClassCatalog::published(false);
        assert_eq!(plain.total_classes(), 11);
        assert_eq!(plain.outlier_index(), None);
        assert_eq!(plain.name(11), None);
    }

    #[test]
    fn dir_names_are_lowercase_hyphenated() {
        assert_eq!(dir_name("Clay Hollow Block"), "clay-hollow-block");
        assert_eq!(dir_name("Cement-Granular"), "cement-granular");
    }

    #[test]
    fn rejects_duplicates() {
        assert!(ClassCatalog::from_names(&["a", "b", "a"], false).is_err());
        assert!(ClassCatalog::new(vec![ClassEntry::new("a")], Some("a".into())).is_err());
        assert!(ClassCatalog::from_names(&[], false).is_err());
    }
}
