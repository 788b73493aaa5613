//! Forward and backward passes of a head.
//!
//! Backward rules, per layer, with `g` the gradient arriving from above:
//! dense `dx = g Wᵀ`, `dW = xᵀ g`, `db = Σ g`; relu passes `g` where the
//! input was positive; inverted dropout multiplies by the forward mask;
//! batchnorm (batch statistics) uses
//! `dz = inv_std / N · (N ĝ − Σ ĝ − x̂ Σ(ĝ x̂))` with `ĝ = γ g`;
//! softmax is fused with cross-entropy as `(p − onehot) / N`.

use rand::Rng;

use super::matrix::Matrix;
use super::params::{HeadParams, LayerParams};
use super::spec::{HeadSpec, LayerSpec};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Lower bound applied to probabilities inside the log.
pub const LOG_CLAMP: f64 = 1e-12;

pub enum Mode<'a> {
    /// Dropout off, batchnorm uses running statistics.
    Infer,
    /// Inverted dropout with masks drawn from the stream, batch statistics.
    Train(&'a mut StreamRng),
}

#[derive(Debug, Clone)]
pub struct BatchNormCache {
    pub xhat: Matrix,
    pub inv_std: Vec<f64>,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input of every layer.
    pub inputs: Vec<Matrix>,
    /// Scaled dropout masks (0 or 1/(1-rate)), train mode only.
    pub masks: Vec<Option<Vec<f64>>>,
    pub batchnorm: Vec<Option<BatchNormCache>>,
    pub probs: Matrix,
}

impl ForwardCache {
    /// Batch mean and variance seen by each batchnorm layer.
    pub fn batch_stats(&self) -> impl Iterator<Item = (usize, &BatchNormCache)> {
        self.batchnorm
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().map(|c| (i, c)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerGrads {
    None,
    Dense { weight: Matrix, bias: Vec<f64> },
    BatchNorm { gamma: Vec<f64>, beta: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub layers: Vec<LayerGrads>,
}

impl Grads {
    /// Same order as [`HeadParams::trainable_mut`].
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for l in &self.layers {
            match l {
                LayerGrads::None => {}
                LayerGrads::Dense { weight, bias } => {
                    out.push(&weight.data);
                    out.push(bias);
                }
                LayerGrads::BatchNorm { gamma, beta } => {
                    out.push(gamma);
                    out.push(beta);
                }
            }
        }
        out
    }
}

pub fn softmax_rows(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for i in 0..out.rows {
        let row = out.row_mut(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

pub fn forward(spec: &HeadSpec, params: &HeadParams, x: &Matrix, mut mode: Mode<'_>) -> Result<(Matrix, ForwardCache)> {
    if x.cols != spec.flatten_in {
        return Err(Error::Head(format!(
            "feature width {} does not match head input {}",
            x.cols, spec.flatten_in
        )));
    }
    if !x.all_finite() {
        return Err(Error::NonFinite("head input"));
    }
    if params.layers.len() != spec.layers.len() {
        return Err(Error::Head("parameters do not match spec".into()));
    }
    let n = x.rows;
    let mut cur = x.clone();
    let mut inputs = Vec::with_capacity(spec.layers.len());
    let mut masks = vec![None; spec.layers.len()];
    let mut batchnorm = vec![None; spec.layers.len()];

    for (i, (layer, p)) in spec.layers.iter().zip(&params.layers).enumerate() {
        inputs.push(cur.clone());
        cur = match (*layer, p) {
            (LayerSpec::Dropout { rate }, _) => match &mut mode {
                Mode::Infer => cur,
                Mode::Train(rng) => {
                    let scale = 1.0 / (1.0 - rate);
                    let mask: Vec<f64> = (0..cur.data.len())
                        .map(|_| if rng.gen::<f64>() >= rate { scale } else { 0.0 })
                        .collect();
                    let mut out = cur;
                    out.data.iter_mut().zip(&mask).for_each(|(v, m)| *v *= m);
                    masks[i] = Some(mask);
                    out
                }
            },
            (LayerSpec::Dense { .. }, LayerParams::Dense { weight, bias }) => cur.affine(weight, bias),
            (LayerSpec::Relu, _) => {
                let mut out = cur;
                out.data.iter_mut().for_each(|v| *v = v.max(0.0));
                out
            }
            (
                LayerSpec::BatchNorm { epsilon, .. },
                LayerParams::BatchNorm {
                    gamma,
                    beta,
                    running_mean,
                    running_var,
                },
            ) => {
                let units = cur.cols;
                let (mean, var) = match mode {
                    Mode::Infer => (running_mean.clone(), running_var.clone()),
                    Mode::Train(_) => {
                        if n < 1 {
                            return Err(Error::Head("batchnorm needs a nonempty batch".into()));
                        }
                        let mean: Vec<f64> = cur.column_sums().iter().map(|s| s / n as f64).collect();
                        let mut var = vec![0.0; units];
                        for r in 0..n {
                            for (j, v) in cur.row(r).iter().enumerate() {
                                let d = v - mean[j];
                                var[j] += d * d;
                            }
                        }
                        var.iter_mut().for_each(|v| *v /= n as f64);
                        (mean, var)
                    }
                };
                let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + epsilon).sqrt()).collect();
                let mut xhat = cur.clone();
                for r in 0..n {
                    for (j, v) in xhat.row_mut(r).iter_mut().enumerate() {
                        *v = (*v - mean[j]) * inv_std[j];
                    }
                }
                let mut out = xhat.clone();
                for r in 0..n {
                    for (j, v) in out.row_mut(r).iter_mut().enumerate() {
                        *v = gamma[j] * *v + beta[j];
                    }
                }
                if let Mode::Train(_) = mode {
                    batchnorm[i] = Some(BatchNormCache { xhat, inv_std, mean, var });
                }
                out
            }
            (LayerSpec::Softmax, _) => softmax_rows(&cur),
            (layer, _) => return Err(Error::Head(format!("no parameters for layer {i} ({layer:?})"))),
        };
    }

    let probs = cur;
    Ok((
        probs.clone(),
        ForwardCache {
            inputs,
            masks,
            batchnorm,
            probs,
        },
    ))
}

pub fn infer(spec: &HeadSpec, params: &HeadParams, x: &Matrix) -> Result<Matrix> {
    forward(spec, params, x, Mode::Infer).map(|(p, _)| p)
}

/// Mean categorical cross-entropy with the log clamped at [`LOG_CLAMP`].
pub fn cross_entropy(probs: &Matrix, labels: &[usize]) -> f64 {
    let n = probs.rows as f64;
    labels
        .iter()
        .enumerate()
        .map(|(i, &y)| -probs.row(i)[y].max(LOG_CLAMP).ln())
        .sum::<f64>()
        / n
}

fn check_labels(labels: &[usize], rows: usize, classes: usize) -> Result<()> {
    if labels.len() != rows {
        return Err(Error::Head(format!("{} labels for {rows} samples", labels.len())));
    }
    if let Some(bad) = labels.iter().find(|&&y| y >= classes) {
        return Err(Error::Head(format!("label {bad} outside 0..{classes}")));
    }
    Ok(())
}

/// Gradients of the loss for the cached forward pass.
pub fn backward(spec: &HeadSpec, params: &HeadParams, cache: &ForwardCache, labels: &[usize]) -> Result<Grads> {
    let n = cache.probs.rows;
    check_labels(labels, n, spec.out_classes)?;
    let mut layers = vec![LayerGrads::None; spec.layers.len()];

    // fused softmax + cross-entropy
    let mut g = cache.probs.clone();
    for (i, &y) in labels.iter().enumerate() {
        g.row_mut(i)[y] -= 1.0;
    }
    g.data.iter_mut().for_each(|v| *v /= n as f64);

    let last = spec.layers.len() - 1;
    for i in (0..last).rev() {
        let input = &cache.inputs[i];
        g = match (spec.layers[i], &params.layers[i]) {
            (LayerSpec::Dropout { .. }, _) => match &cache.masks[i] {
                Some(mask) => {
                    let mut out = g;
                    out.data.iter_mut().zip(mask).for_each(|(v, m)| *v *= m);
                    out
                }
                None => g,
            },
            (LayerSpec::Dense { .. }, LayerParams::Dense { weight, .. }) => {
                layers[i] = LayerGrads::Dense {
                    weight: input.t_matmul(&g),
                    bias: g.column_sums(),
                };
                g.matmul_t(weight)
            }
            (LayerSpec::Relu, _) => {
                let mut out = g;
                out.data
                    .iter_mut()
                    .zip(&input.data)
                    .for_each(|(v, x)| if *x <= 0.0 { *v = 0.0 });
                out
            }
            (LayerSpec::BatchNorm { .. }, LayerParams::BatchNorm { gamma, .. }) => {
                let bn = cache.batchnorm[i]
                    .as_ref()
                    .ok_or_else(|| Error::Head("backward needs a train-mode forward pass".into()))?;
                let units = g.cols;
                let mut dgamma = vec![0.0; units];
                let dbeta = g.column_sums();
                let mut sum_gh = vec![0.0; units];
                let mut sum_gh_xhat = vec![0.0; units];
                for r in 0..n {
                    for j in 0..units {
                        let gv = g.row(r)[j];
                        let xh = bn.xhat.row(r)[j];
                        dgamma[j] += gv * xh;
                        let gh = gv * gamma[j];
                        sum_gh[j] += gh;
                        sum_gh_xhat[j] += gh * xh;
                    }
                }
                let mut out = Matrix::zeros(n, units);
                let nf = n as f64;
                for r in 0..n {
                    for j in 0..units {
                        let gh = g.row(r)[j] * gamma[j];
                        let xh = bn.xhat.row(r)[j];
                        out.row_mut(r)[j] = bn.inv_std[j] / nf * (nf * gh - sum_gh[j] - xh * sum_gh_xhat[j]);
                    }
                }
                layers[i] = LayerGrads::BatchNorm { gamma: dgamma, beta: dbeta };
                out
            }
            (layer, _) => return Err(Error::Head(format!("cannot backpropagate through {layer:?}"))),
        };
    }
    Ok(Grads { layers })
}

/// Train-mode forward, loss and gradients for one batch.
pub fn loss_and_grad(
    spec: &HeadSpec,
    params: &HeadParams,
    x: &Matrix,
    labels: &[usize],
    rng: &mut StreamRng,
) -> Result<(f64, Grads, ForwardCache)> {
    check_labels(labels, x.rows, spec.out_classes)?;
    let (probs, cache) = forward(spec, params, x, Mode::Train(rng))?;
    let loss = cross_entropy(&probs, labels);
    if !loss.is_finite() {
        return Err(Error::NonFinite("loss"));
    }
    let grads = backward(spec, params, &cache, labels)?;
    Ok((loss, grads, cache))
}

/// `running <- m * running + (1 - m) * batch` for every batchnorm layer.
pub fn update_running_stats(spec: &HeadSpec, params: &mut HeadParams, cache: &ForwardCache) {
    for (i, bn) in cache.batch_stats() {
        if let (
            LayerSpec::BatchNorm { momentum, .. },
            LayerParams::BatchNorm {
                running_mean,
                running_var,
                ..
            },
        ) = (spec.layers[i], &mut params.layers[i])
        {
            for (r, b) in running_mean.iter_mut().zip(&bn.mean) {
                *r = super::params::snap(momentum * *r + (1.0 - momentum) * b);
            }
            for (r, b) in running_var.iter_mut().zip(&bn.var) {
                *r = super::params::snap(momentum * *r + (1.0 - momentum) * b);
            }
        }
    }
}

/// Row-wise argmax, lowest index on ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}
