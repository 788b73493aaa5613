#![allow(dead_code)]

use std::path::Path;

use matrec::dataset::{make_splits, scan_dataset, SplitManifest, DEFAULT_FRACTIONS};
use matrec::fixtures::write_texture_dataset;
use matrec::head::{cross_entropy, forward, loss_and_grad, HeadParams, HeadSpec, Matrix, Mode};
use matrec::rng::derive_rng;
use rand::Rng;

/// Texture dataset under `dir`, scanned and split with `seed`.
pub fn texture_splits(dir: &Path, per_class: usize, seed: u64) -> SplitManifest {
    let catalog = write_texture_dataset(dir, per_class, seed, false).unwrap();
    let manifest = scan_dataset(dir, &catalog).unwrap();
    make_splits(&manifest, DEFAULT_FRACTIONS, seed).unwrap()
}

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = derive_rng("test-data", seed, 0);
    let data = (0..rows * cols)
        .map(|_| {
            // Box-Muller
            let u: f64 = rng.gen_range(1e-12..1.0);
            let v: f64 = rng.gen();
            (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
        })
        .collect();
    Matrix::from_vec(rows, cols, data)
}

/// Train-mode loss with dropout masks drawn from a fixed stream, so the
/// same masks are used for every evaluation.
pub fn fixed_mask_loss(spec: &HeadSpec, params: &HeadParams, x: &Matrix, labels: &[usize], mask_seed: u64) -> f64 {
    let mut rng = derive_rng("test-mask", mask_seed, 0);
    let (probs, _) = forward(spec, params, x, Mode::Train(&mut rng)).unwrap();
    cross_entropy(&probs, labels)
}

/// Central differences of the loss for every trainable tensor.
pub fn numeric_grads(
    spec: &HeadSpec,
    params: &HeadParams,
    x: &Matrix,
    labels: &[usize],
    mask_seed: u64,
    h: f64,
) -> Vec<Vec<f64>> {
    let mut work = params.clone();
    let shapes: Vec<usize> = work.trainable_mut().iter().map(|t| t.len()).collect();
    let mut out = Vec::new();
    for (k, len) in shapes.into_iter().enumerate() {
        let mut g = vec![0.0; len];
        for (j, gj) in g.iter_mut().enumerate() {
            let orig = work.trainable_mut()[k][j];
            work.trainable_mut()[k][j] = orig + h;
            let up = fixed_mask_loss(spec, &work, x, labels, mask_seed);
            work.trainable_mut()[k][j] = orig - h;
            let down = fixed_mask_loss(spec, &work, x, labels, mask_seed);
            work.trainable_mut()[k][j] = orig;
            *gj = (up - down) / (2.0 * h);
        }
        out.push(g);
    }
    out
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)` over a whole tensor; 0 when both vanish.
fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// ‖a − b‖ / max(‖a‖, ‖b‖, floor).
pub fn relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b)).max(floor);
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Class names and counts of a tab-separated confusion table with a
/// header row and a header column.
pub fn read_confusion_tsv(path: &Path) -> (Vec<String>, Vec<Vec<u64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let names: Vec<String> = lines.next().unwrap().split('\t').skip(1).map(str::to_string).collect();
    let counts = lines
        .map(|l| l.split('\t').skip(1).map(|v| v.trim().parse().unwrap()).collect())
        .collect();
    (names, counts)
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Adds uniform noise in `(-scale, scale)` to every trainable value, so
/// biases and batchnorm affine terms are not at their initial constants.
pub fn jitter_params(params: &mut HeadParams, scale: f64, seed: u64) {
    let mut rng = derive_rng("test-jitter", seed, 0);
    for t in params.trainable_mut() {
        for v in t.iter_mut() {
            *v += rng.gen_range(-scale..scale);
        }
    }
}

/// Per-tensor relative error between the analytic gradients and central
/// differences, dropout masks held fixed.
pub fn gradient_errors(spec: &HeadSpec, params: &HeadParams, x: &Matrix, labels: &[usize], mask_seed: u64) -> Vec<f64> {
    let mut rng = derive_rng("test-mask", mask_seed, 0);
    let (_, grads, _) = loss_and_grad(spec, params, x, labels, &mut rng).unwrap();
    let numeric = numeric_grads(spec, params, x, labels, mask_seed, 1e-5);
    let analytic = grads.tensors();
    assert_eq!(analytic.len(), numeric.len());
    // a dense bias feeding batch norm has an exactly zero gradient; judge
    // such tensors against the scale of the whole gradient
    let total = analytic.iter().map(|t| norm(t).powi(2)).sum::<f64>().sqrt();
    analytic.iter().zip(&numeric).map(|(a, n)| relative_error(a, n, 1e-3 * total)).collect()
}

pub fn random_labels(n: usize, classes: usize, seed: u64) -> Vec<usize> {
    let mut rng = derive_rng("test-labels", seed, 0);
    (0..n).map(|_| rng.gen_range(0..classes)).collect()
}
