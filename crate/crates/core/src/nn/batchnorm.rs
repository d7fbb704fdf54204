use ndarray::{Array2, Axis};

use super::{Mode, Tensor2D};
use crate::error::{Error, Result};

pub const DEFAULT_MOMENTUM: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 1e-5;

/// Per-channel batch normalization over batch × time.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    channels: usize,
    pub gamma: Tensor2D,
    pub beta: Tensor2D,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub momentum: f64,
    pub epsilon: f64,
}

/// Values kept from a training forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct BatchNormCache {
    normalized: Vec<Array2<f64>>,
    inv_std: Vec<f64>,
}

impl BatchNorm {
    pub fn new(channels: usize) -> Self {
        Self {
            channels,
            gamma: Tensor2D::param(Array2::ones((channels, 1))),
            beta: Tensor2D::param(Array2::zeros((channels, 1))),
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            momentum: DEFAULT_MOMENTUM,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn param_count(&self) -> usize {
        2 * self.channels
    }

    fn check_batch(&self, batch: &[Tensor2D]) -> Result<()> {
        let first = batch
            .first()
            .ok_or_else(|| Error::Empty("batch norm on an empty batch".into()))?;
        if first.channels() != self.channels {
            return Err(Error::shape("batchnorm", format!("{} channels", self.channels), first.shape_str()));
        }
        if let Some(bad) = batch.iter().find(|t| t.shape() != first.shape()) {
            return Err(Error::shape("batchnorm", first.shape_str(), bad.shape_str()));
        }
        Ok(())
    }

    /// Eval-mode transform of a single sample using the running statistics.
    pub fn infer(&self, x: &Tensor2D) -> Result<Tensor2D> {
        self.check_batch(std::slice::from_ref(x))?;
        let mut out = x.data.clone();
        for (c, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
            let scale = self.gamma.data[[c, 0]] / (self.running_var[c] + self.epsilon).sqrt();
            let shift = self.beta.data[[c, 0]] - self.running_mean[c] * scale;
            row.mapv_inplace(|v| v * scale + shift);
        }
        Ok(Tensor2D::new(out))
    }

    /// Training-mode forward: normalizes with batch statistics (biased
    /// variance) and folds them into the running averages.
    pub fn forward_train(&mut self, batch: &[Tensor2D]) -> Result<(Vec<Tensor2D>, BatchNormCache)> {
        self.check_batch(batch)?;
        if batch.len() < 2 {
            return Err(Error::InvalidArgument(
                "batch norm training needs a batch of at least 2".into(),
            ));
        }
        let len = batch[0].length();
        let count = (batch.len() * len) as f64;
        let mut mean = vec![0.0; self.channels];
        let mut var = vec![0.0; self.channels];
        for x in batch {
            for (c, row) in x.data.axis_iter(Axis(0)).enumerate() {
                mean[c] += row.sum();
            }
        }
        mean.iter_mut().for_each(|m| *m /= count);
        for x in batch {
            for (c, row) in x.data.axis_iter(Axis(0)).enumerate() {
                let m = mean[c];
                var[c] += row.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
            }
        }
        var.iter_mut().for_each(|v| *v /= count);
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + self.epsilon).sqrt()).collect();

        let mut normalized = Vec::with_capacity(batch.len());
        let mut outputs = Vec::with_capacity(batch.len());
        for x in batch {
            let mut xhat = x.data.clone();
            for (c, mut row) in xhat.axis_iter_mut(Axis(0)).enumerate() {
                let (m, s) = (mean[c], inv_std[c]);
                row.mapv_inplace(|v| (v - m) * s);
            }
            let mut y = xhat.clone();
            for (c, mut row) in y.axis_iter_mut(Axis(0)).enumerate() {
                let (g, b) = (self.gamma.data[[c, 0]], self.beta.data[[c, 0]]);
                row.mapv_inplace(|v| g * v + b);
            }
            normalized.push(xhat);
            outputs.push(Tensor2D::new(y));
        }

        for c in 0..self.channels {
            self.running_mean[c] = (1.0 - self.momentum) * self.running_mean[c] + self.momentum * mean[c];
            self.running_var[c] = (1.0 - self.momentum) * self.running_var[c] + self.momentum * var[c];
        }
        Ok((outputs, BatchNormCache { normalized, inv_std }))
    }

    /// Backward through a training forward pass. Returns input gradients and
    /// `(d gamma, d beta)` as `(channels, 1)` arrays.
    pub fn backward(&self, cache: &BatchNormCache, upstream: &[Tensor2D]) -> Result<(Vec<Tensor2D>, Array2<f64>, Array2<f64>)> {
        if upstream.len() != cache.normalized.len() {
            return Err(Error::shape(
                "batchnorm backward",
                format!("batch of {}", cache.normalized.len()),
                format!("batch of {}", upstream.len()),
            ));
        }
        for (dy, xhat) in upstream.iter().zip(&cache.normalized) {
            if dy.data.dim() != xhat.dim() {
                return Err(Error::shape("batchnorm backward", format!("{:?}", xhat.dim()), dy.shape_str()));
            }
        }
        let count = (upstream.len() * upstream[0].length()) as f64;
        let mut dgamma = Array2::zeros((self.channels, 1));
        let mut dbeta = Array2::zeros((self.channels, 1));
        for (dy, xhat) in upstream.iter().zip(&cache.normalized) {
            for c in 0..self.channels {
                let g = dy.data.row(c);
                let h = xhat.row(c);
                dbeta[[c, 0]] += g.sum();
                dgamma[[c, 0]] += g.iter().zip(h.iter()).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        let inputs = upstream
            .iter()
            .zip(&cache.normalized)
            .map(|(dy, xhat)| {
                let mut dx = Array2::zeros(dy.data.raw_dim());
                for c in 0..self.channels {
                    let gamma = self.gamma.data[[c, 0]];
                    let scale = gamma * cache.inv_std[c] / count;
                    let (sum_dy, sum_dy_xhat) = (dbeta[[c, 0]], dgamma[[c, 0]]);
                    let g = dy.data.row(c);
                    let h = xhat.row(c);
                    for (t, d) in dx.row_mut(c).iter_mut().enumerate() {
                        *d = scale * (count * g[t] - sum_dy - h[t] * sum_dy_xhat);
                    }
                }
                Tensor2D::new(dx)
            })
            .collect();
        Ok((inputs, dgamma, dbeta))
    }
}

pub fn batchnorm_forward(layer: &mut BatchNorm, batch: &[Tensor2D], mode: Mode) -> Result<Vec<Tensor2D>> {
    match mode {
        Mode::Train => layer.forward_train(batch).map(|(out, _)| out),
        Mode::Eval => {
            layer.check_batch(batch)?;
            batch.iter().map(|x| layer.infer(x)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_batch(n: usize, c: usize, l: usize, seed: u64) -> Vec<Tensor2D> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Tensor2D::new(Array2::from_shape_simple_fn((c, l), || rng.gen_range(-3.0..5.0))))
            .collect()
    }

    fn channel_stats(batch: &[Tensor2D], c: usize) -> (f64, f64) {
        let vals: Vec<f64> = batch.iter().flat_map(|t| t.data.row(c).to_vec()).collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let v = vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / vals.len() as f64;
        (m, v)
    }

    #[test]
    fn train_output_is_standardized() {
        let mut bn = BatchNorm::new(3);
        bn.epsilon = 0.0;
        let out = batchnorm_forward(&mut bn, &random_batch(5, 3, 40, 1), Mode::Train).unwrap();
        for c in 0..3 {
            let (m, v) = channel_stats(&out, c);
            assert!(m.abs() < 1e-6);
            assert!((v - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn affine_parameters_apply() {
        let mut bn = BatchNorm::new(1);
        bn.epsilon = 0.0;
        let batch = batchnorm_forward(&mut BatchNorm { epsilon: 0.0, ..BatchNorm::new(1) }, &random_batch(4, 1, 25, 2), Mode::Train).unwrap();
        bn.gamma.data.fill(2.0);
        bn.beta.data.fill(3.0);
        let out = batchnorm_forward(&mut bn, &batch, Mode::Train).unwrap();
        for (x, y) in batch.iter().zip(&out) {
            for (a, b) in x.data.iter().zip(y.data.iter()) {
                assert!((b - (2.0 * a + 3.0)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn eval_with_identity_statistics() {
        let mut bn = BatchNorm::new(2);
        let batch = random_batch(1, 2, 10, 3);
        let out = batchnorm_forward(&mut bn, &batch, Mode::Eval).unwrap();
        let factor = 1.0 / (1.0 + bn.epsilon).sqrt();
        for (a, b) in batch[0].data.iter().zip(out[0].data.iter()) {
            assert!((b - a * factor).abs() < 1e-12);
        }
    }

    #[test]
    fn running_statistics_update() {
        let mut bn = BatchNorm::new(1);
        let batch = random_batch(3, 1, 20, 4);
        let (m, v) = channel_stats(&batch, 0);
        bn.forward_train(&batch).unwrap();
        assert!((bn.running_mean[0] - 0.1 * m).abs() < 1e-12);
        assert!((bn.running_var[0] - (0.9 + 0.1 * v)).abs() < 1e-12);
        assert!(bn.running_var.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn single_sample_training_is_rejected() {
        let mut bn = BatchNorm::new(2);
        assert!(bn.forward_train(&random_batch(1, 2, 10, 5)).is_err());
        assert!(bn.forward_train(&[]).is_err());
        assert!(bn.forward_train(&random_batch(2, 3, 10, 5)).is_err());
    }
}
