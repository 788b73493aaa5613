//! Single-image latency of the full predict path, decode included.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{Classifier, TtaConfig};
use crate::raster;

pub const DEFAULT_WARMUP: usize = 5;

/// Reference figure for one prediction on a Raspberry Pi 3, in seconds.
pub const PI_REFERENCE_SECONDS: f64 = 21.79;

pub const TIMED_STAGES: &str = "decode, resize, preprocess, backbone, head, argmax";

pub trait Clock {
    /// Time elapsed since an arbitrary fixed origin.
    fn now(&mut self) -> Duration;
}

#[derive(Debug)]
pub struct MonotonicClock(Instant);

impl Default for MonotonicClock {
    fn default() -> Self {
        MonotonicClock(Instant::now())
    }
}

impl Clock for MonotonicClock {
    fn now(&mut self) -> Duration {
        self.0.elapsed()
    }
}

/// Replays scripted run durations: every second reading advances time by
/// the next sample.
#[derive(Debug, Clone)]
pub struct FakeClock {
    samples: Vec<Duration>,
    next: usize,
    t: Duration,
    reads: usize,
}

impl FakeClock {
    pub fn from_millis(samples: &[f64]) -> Self {
        FakeClock {
            samples: samples.iter().map(|&ms| Duration::from_nanos((ms * 1e6).round() as u64)).collect(),
            next: 0,
            t: Duration::ZERO,
            reads: 0,
        }
    }
}

impl Clock for FakeClock {
    fn now(&mut self) -> Duration {
        if self.reads % 2 == 1 {
            self.t += self.samples.get(self.next).copied().unwrap_or_default();
            self.next += 1;
        }
        self.reads += 1;
        self.t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub runs: usize,
    pub warmup: usize,
    pub samples_ms: Vec<f64>,
    pub median_ms: f64,
    pub mean_ms: f64,
    /// Nearest rank: the `⌈0.95·n⌉`-th smallest sample.
    pub p95_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
    /// Population standard deviation over the mean.
    pub cv: f64,
    pub tta: bool,
    pub timed_stages: String,
    pub hardware_note: String,
}

/// `⌈p·n⌉`-th smallest value (1-based rank), `p` in (0, 1].
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p * n as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

pub fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

impl LatencyStats {
    pub fn from_samples(samples_ms: Vec<f64>, warmup: usize, tta: bool, hardware_note: String) -> Result<Self> {
        if samples_ms.is_empty() {
            return Err(Error::Config("benchmark needs at least one timed run".into()));
        }
        let mut sorted = samples_ms.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let var = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Ok(LatencyStats {
            runs: sorted.len(),
            warmup,
            median_ms: median(&sorted),
            mean_ms: mean,
            p95_ms: nearest_rank(&sorted, 0.95),
            min_ms: sorted[0],
            max_ms: sorted[sorted.len() - 1],
            cv: if mean > 0.0 { var.sqrt() / mean } else { 0.0 },
            samples_ms,
            tta,
            timed_stages: TIMED_STAGES.to_string(),
            hardware_note,
        })
    }
}

pub fn hardware_note() -> String {
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!(
        "{}-{}, {cpus} logical cpus, timed on 1 worker",
        std::env::consts::OS,
        std::env::consts::ARCH
    )
}

/// Runs `warmup` untimed calls, then `runs` timed ones. Only the call
/// itself is inside the timed region.
pub fn measure<C: Clock>(
    clock: &mut C,
    runs: usize,
    warmup: usize,
    mut f: impl FnMut() -> Result<()>,
) -> Result<Vec<f64>> {
    if runs < 1 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    for _ in 0..warmup {
        f()?;
    }
    let mut samples = Vec::with_capacity(runs);
    for _ in 0..runs {
        let start = clock.now();
        f()?;
        let end = clock.now();
        samples.push((end - start).as_nanos() as f64 / 1e6);
    }
    Ok(samples)
}

/// Times decode through argmax for one encoded image on a single worker.
pub fn time_single_image<C: Clock + Send>(
    classifier: &Classifier<'_>,
    image_bytes: &[u8],
    runs: usize,
    warmup: usize,
    tta: &TtaConfig,
    clock: &mut C,
) -> Result<LatencyStats> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let path = std::path::Path::new("<bench image>");
    let samples = pool.install(|| {
        measure(clock, runs, warmup, || {
            let img = raster::decode_rgb(image_bytes, path)?;
            classifier.predict(&img, tta).map(|_| ())
        })
    })?;
    LatencyStats::from_samples(samples, warmup, tta.enabled, hardware_note())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_run_stats() {
        let s = LatencyStats::from_samples(vec![12.5], 0, false, String::new()).unwrap();
        assert_eq!((s.median_ms, s.mean_ms, s.p95_ms, s.cv), (12.5, 12.5, 12.5, 0.0));
    }

    #[test]
    fn fake_clock_drives_measure() {
        let mut clock = FakeClock::from_millis(&[3.0, 1.0, 2.0]);
        let mut calls = 0;
        let samples = measure(&mut clock, 3, 2, || {
            calls += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(calls, 5);
        assert_eq!(samples, vec![3.0, 1.0, 2.0]);
        assert!(measure(&mut clock, 0, 0, || Ok(())).is_err());
    }

    #[test]
    fn nearest_rank_small_cases() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(nearest_rank(&v, 0.95), 4.0);
        assert_eq!(nearest_rank(&v, 0.5), 2.0);
        assert_eq!(median(&v), 2.5);
    }
}
