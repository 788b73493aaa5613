use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are actual classes, columns predicted classes, both in catalog order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    /// `None` when the class was never predicted.
    pub precision: Option<f64>,
    /// `None` when the class has no test samples.
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub support: u64,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let k = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = classes.len();
        if counts.len() != k || counts.iter().any(|r| r.len() != k) {
            return Err(Error::Config(format!("confusion matrix must be {k}x{k}")));
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn from_pairs(classes: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut m = ConfusionMatrix::new(classes);
        for &(actual, predicted) in pairs {
            m.record(actual, predicted)?;
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.classes.len()
    }

    pub fn record(&mut self, actual: usize, predicted: usize) -> Result<()> {
        let k = self.size();
        if actual >= k || predicted >= k {
            return Err(Error::Config(format!(
                "pair ({actual}, {predicted}) outside a {k}-class matrix"
            )));
        }
        self.counts[actual][predicted] += 1;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.size()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }

    /// Percentage; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        ratio(self.trace(), self.total()).map_or(0.0, |a| 100.0 * a)
    }

    pub fn recall(&self, i: usize) -> Option<f64> {
        ratio(self.counts[i][i], self.row_sum(i))
    }

    pub fn precision(&self, i: usize) -> Option<f64> {
        ratio(self.counts[i][i], self.col_sum(i))
    }

    pub fn f1(&self, i: usize) -> Option<f64> {
        let p = self.precision(i)?;
        let r = self.recall(i)?;
        if p + r == 0.0 {
            Some(0.0)
        } else {
            Some(2.0 * p * r / (p + r))
        }
    }

    pub fn metrics(&self) -> Vec<ClassMetrics> {
        (0..self.size())
            .map(|i| ClassMetrics {
                class: self.classes[i].clone(),
                precision: self.precision(i),
                recall: self.recall(i),
                f1: self.f1(i),
                support: self.row_sum(i),
            })
            .collect()
    }
}
