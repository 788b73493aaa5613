use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::EvalReport;
use crate::canonical;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

pub const ALL_FORMATS: [ReportFormat; 3] = [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown];

impl ReportFormat {
    pub fn file_name(self) -> &'static str {
        match self {
            ReportFormat::Json => "report.json",
            ReportFormat::Csv => "confusion.csv",
            ReportFormat::Markdown => "report.md",
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Confusion grid with a header row and a header column of class names.
pub fn render_csv(report: &EvalReport) -> String {
    let c = &report.confusion;
    let mut out = String::from("actual\\predicted");
    for name in &c.classes {
        out.push(',');
        out.push_str(&csv_field(name));
    }
    out.push('\n');
    for (name, row) in c.classes.iter().zip(&c.counts) {
        out.push_str(&csv_field(name));
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

fn metric(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}

pub fn render_markdown(report: &EvalReport) -> String {
    let p = &report.protocol;
    let mut s = String::from("# Evaluation report\n\n");
    s.push_str("| Images per prediction | Illumination | Accuracy (%) | Correct | Total |\n");
    s.push_str("|---|---|---|---|---|\n");
    let illum = match (p.illumination, p.seed, p.fixed_illumination) {
        (false, _, _) => "off".to_string(),
        (true, Some(seed), _) => format!("seed {seed}"),
        (true, None, Some(f)) => format!("fixed c={} g={} s={}", f.contrast, f.gamma, f.saturation),
        (true, None, None) => "on".to_string(),
    };
    let _ = writeln!(
        s,
        "| {} | {} | {:.4} | {} | {} |",
        if p.tta { 5 } else { 1 },
        illum,
        report.accuracy,
        report.correct,
        report.total
    );
    let _ = writeln!(s, "\nCheckpoint: `{}`", report.checkpoint_digest);
    if let Some(t) = &report.timestamp {
        let _ = writeln!(s, "Timestamp: {t}");
    }

    s.push_str("\n## Confusion matrix (rows actual, columns predicted)\n\n|  |");
    let c = &report.confusion;
    for name in &c.classes {
        let _ = write!(s, " {name} |");
    }
    s.push_str("\n|---|");
    s.push_str(&"---|".repeat(c.size()));
    s.push('\n');
    for (name, row) in c.classes.iter().zip(&c.counts) {
        let _ = write!(s, "| {name} |");
        for v in row {
            let _ = write!(s, " {v} |");
        }
        s.push('\n');
    }

    s.push_str("\n## Per-class metrics\n\n| Class | Precision | Recall | F1 | Support |\n|---|---|---|---|---|\n");
    for m in &report.per_class {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} |",
            m.class,
            metric(m.precision),
            metric(m.recall),
            metric(m.f1),
            m.support
        );
    }
    if !report.skipped.is_empty() {
        s.push_str("\n## Skipped\n\n");
        for k in &report.skipped {
            let _ = writeln!(s, "- {}: {}", k.id, k.reason);
        }
    }
    s
}

/// Writes the requested formats into `dir` and returns the paths written.
pub fn emit_report(report: &EvalReport, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for &f in formats {
        let path = dir.join(f.file_name());
        match f {
            ReportFormat::Json => canonical::write_canonical_json(&path, report)?,
            ReportFormat::Csv => std::fs::write(&path, render_csv(report)).map_err(|e| Error::io(&path, e))?,
            ReportFormat::Markdown => {
                std::fs::write(&path, render_markdown(report)).map_err(|e| Error::io(&path, e))?
            }
        }
        written.push(path);
    }
    Ok(written)
}

pub fn load_report(path: &Path) -> Result<EvalReport> {
    canonical::read_json(path)
}
