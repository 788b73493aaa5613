//! Test-set evaluation: confusion matrices, per-class metrics and the
//! one-shot illumination protocol.

mod confusion;
mod reference;
mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use confusion::{ClassMetrics, ConfusionMatrix};
pub use reference::{published_accuracy, PublishedAccuracy, PUBLISHED_ACCURACY};
pub use report::{emit_report, load_report, render_csv, render_markdown, ReportFormat, ALL_FORMATS};

use crate::augment::{illumination_jitter, sample_illumination, AugmentConfig, IlluminationParams};
use crate::canonical;
use crate::dataset::{LabeledPath, SkippedFile};
use crate::error::{Error, Result};
use crate::inference::{Classifier, TtaConfig};
use crate::raster::{self, RgbImage};
use crate::rng::SampleRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub tta: bool,
    pub illumination: bool,
    /// Seed of the illumination draw; `None` for clean runs.
    pub seed: Option<u64>,
    /// Set when one fixed transform replaced the seeded draws.
    pub fixed_illumination: Option<IlluminationParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Percentage, `100 * trace / total`.
    pub accuracy: f64,
    pub correct: u64,
    pub total: u64,
    pub confusion: ConfusionMatrix,
    pub per_class: Vec<ClassMetrics>,
    pub protocol: Protocol,
    pub checkpoint_digest: String,
    /// From `SOURCE_DATE_EPOCH` when set, so reports stay reproducible.
    pub timestamp: Option<String>,
    pub skipped: Vec<SkippedFile>,
}

impl EvalReport {
    pub fn from_confusion(
        confusion: ConfusionMatrix,
        protocol: Protocol,
        checkpoint_digest: &str,
        skipped: Vec<SkippedFile>,
    ) -> Self {
        EvalReport {
            accuracy: confusion.accuracy(),
            correct: confusion.trace(),
            total: confusion.total(),
            per_class: confusion.metrics(),
            confusion,
            protocol,
            checkpoint_digest: checkpoint_digest.to_string(),
            timestamp: report_timestamp(),
            skipped,
        }
    }

    /// Accounting identities: totals, trace and, when given, per-class
    /// row sums.
    pub fn check_accounting(&self, expected_rows: Option<&[u64]>) -> Result<()> {
        let c = &self.confusion;
        if c.total() != self.total || c.trace() != self.correct {
            return Err(Error::Config("report totals disagree with its confusion matrix".into()));
        }
        if self.accuracy != c.accuracy() {
            return Err(Error::Config("report accuracy disagrees with its confusion matrix".into()));
        }
        if let Some(rows) = expected_rows {
            if rows.len() != c.size() || (0..c.size()).any(|i| c.row_sum(i) != rows[i]) {
                return Err(Error::Config("confusion row sums differ from class counts".into()));
            }
        }
        Ok(())
    }

    pub fn digest(&self) -> Result<String> {
        canonical::canonical_digest(self)
    }
}

fn report_timestamp() -> Option<String> {
    std::env::var("SOURCE_DATE_EPOCH").ok().filter(|s| !s.trim().is_empty())
}

/// Per-class test counts over material classes.
pub fn class_counts(items: &[LabeledPath], classes: usize) -> Vec<u64> {
    let mut rows = vec![0; classes];
    for it in items {
        if it.class_index < classes {
            rows[it.class_index] += 1;
        }
    }
    rows
}

type Transform<'a> = dyn Fn(usize, &RgbImage) -> Result<RgbImage> + Sync + 'a;

fn run(
    items: &[LabeledPath],
    classifier: &Classifier<'_>,
    tta: &TtaConfig,
    transform: Option<&Transform<'_>>,
    protocol: Protocol,
    checkpoint_digest: &str,
) -> Result<EvalReport> {
    let catalog = classifier.catalog;
    if items.is_empty() {
        return Err(Error::Config("empty test partition".into()));
    }
    if let Some(it) = items.iter().find(|it| !catalog.is_material(it.class_index)) {
        return Err(Error::Config(format!("test partition contains non-material record {}", it.id)));
    }

    enum Outcome {
        Predicted(usize),
        Skipped(String),
    }
    let outcomes: Vec<Outcome> = items
        .par_iter()
        .enumerate()
        .map(|(index, it)| {
            let img = match raster::load_rgb(&it.path) {
                Ok(img) => img,
                Err(e @ (Error::Decode { .. } | Error::Io { .. })) => return Ok(Outcome::Skipped(e.to_string())),
                Err(e) => return Err(e),
            };
            let img = match transform {
                Some(t) => t(index, &img)?,
                None => img,
            };
            Ok(Outcome::Predicted(classifier.predict(&img, tta)?.predicted_index))
        })
        .collect::<Result<_>>()?;

    let mut confusion = ConfusionMatrix::new(catalog.material_names());
    let mut skipped = Vec::new();
    for (it, outcome) in items.iter().zip(outcomes) {
        match outcome {
            Outcome::Predicted(p) => confusion.record(it.class_index, p)?,
            Outcome::Skipped(reason) => {
                log::warn!("excluding {}: {reason}", it.id);
                skipped.push(SkippedFile {
                    id: it.id.clone(),
                    reason,
                });
            }
        }
    }
    let report = EvalReport::from_confusion(confusion, protocol, checkpoint_digest, skipped);
    report.check_accounting(None)?;
    Ok(report)
}

/// Predicts every test image and tallies the confusion matrix. Unreadable
/// images are listed under `skipped` and left out of the totals.
pub fn evaluate(
    items: &[LabeledPath],
    classifier: &Classifier<'_>,
    tta: &TtaConfig,
    checkpoint_digest: &str,
) -> Result<EvalReport> {
    let protocol = Protocol {
        tta: tta.enabled,
        illumination: false,
        seed: None,
        fixed_illumination: None,
    };
    run(items, classifier, tta, None, protocol, checkpoint_digest)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Illumination {
    /// Parameters for test image `i` drawn from `SampleRng(seed, 0, i)`.
    Seeded(u64),
    /// The same parameters for every image.
    Fixed(IlluminationParams),
}

/// Parameters applied to test image `index`.
pub fn illumination_params(mode: Illumination, cfg: &AugmentConfig, index: usize) -> IlluminationParams {
    match mode {
        Illumination::Seeded(seed) => {
            let mut rng = SampleRng::new(seed, 0, index as u32).stream();
            sample_illumination(cfg, &mut rng)
        }
        Illumination::Fixed(p) => p,
    }
}

/// Transforms each test image once with illumination jitter, then evaluates.
pub fn illumination_eval(
    items: &[LabeledPath],
    classifier: &Classifier<'_>,
    tta: &TtaConfig,
    cfg: &AugmentConfig,
    mode: Illumination,
    checkpoint_digest: &str,
) -> Result<EvalReport> {
    cfg.validate()?;
    if let Illumination::Fixed(p) = mode {
        p.validate(cfg)?;
    }
    let transform = |index: usize, img: &RgbImage| {
        illumination_jitter(img, illumination_params(mode, cfg, index), cfg)
    };
    let protocol = Protocol {
        tta: tta.enabled,
        illumination: true,
        seed: match mode {
            Illumination::Seeded(s) => Some(s),
            Illumination::Fixed(_) => None,
        },
        fixed_illumination: match mode {
            Illumination::Fixed(p) => Some(p),
            Illumination::Seeded(_) => None,
        },
    };
    run(items, classifier, tta, Some(&transform), protocol, checkpoint_digest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn constant_classifier_on_balanced_pair() {
        let pairs = [(0, 0), (0, 0), (1, 0), (1, 0)];
        let m = ConfusionMatrix::from_pairs(names(2), &pairs).unwrap();
        assert_eq!(m.accuracy(), 50.0);
        assert_eq!(m.counts, vec![vec![2, 0], vec![2, 0]]);
        assert_eq!(m.recall(0), Some(1.0));
        assert_eq!(m.precision(0), Some(0.5));
        assert_eq!(m.precision(1), None);
        assert_eq!(m.recall(1), Some(0.0));
        assert_eq!(m.f1(1), None);
    }

    #[test]
    fn report_accounting() {
        let pairs = [(0, 0), (1, 1), (2, 1)];
        let m = ConfusionMatrix::from_pairs(names(3), &pairs).unwrap();
        let protocol = Protocol {
            tta: false,
            illumination: false,
            seed: None,
            fixed_illumination: None,
        };
        let r = EvalReport::from_confusion(m, protocol, "x", vec![]);
        r.check_accounting(Some(&[1, 1, 1])).unwrap();
        assert!(r.check_accounting(Some(&[2, 1, 0])).is_err());
        assert_eq!(r.correct, 2);
    }
}
