use ndarray::Array2;

use super::Tensor2D;
use crate::error::{Error, Result};

pub fn relu(x: &Tensor2D) -> Tensor2D {
    Tensor2D::new(x.data.mapv(|v| v.max(0.0)))
}

/// Gradient through ReLU given the forward input.
pub fn relu_backward(x: &Tensor2D, upstream: &Tensor2D) -> Result<Tensor2D> {
    if x.shape() != upstream.shape() {
        return Err(Error::shape("relu backward", x.shape_str(), upstream.shape_str()));
    }
    let mut dx = upstream.data.clone();
    dx.zip_mut_with(&x.data, |g, &v| {
        if v <= 0.0 {
            *g = 0.0;
        }
    });
    Ok(Tensor2D::new(dx))
}

/// Numerically stable softmax along the row of a `(1, K)` tensor.
pub fn softmax(x: &Tensor2D) -> Result<Tensor2D> {
    if x.channels() != 1 {
        return Err(Error::shape("softmax", "(1, K)", x.shape_str()));
    }
    let max = x.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp = x.data.mapv(|v| (v - max).exp());
    let sum = exp.sum();
    Ok(Tensor2D::new(exp / sum))
}

/// Vector–Jacobian product of softmax: `p ⊙ (g − ⟨g, p⟩)`.
pub fn softmax_backward(output: &Tensor2D, upstream: &Tensor2D) -> Result<Tensor2D> {
    if output.shape() != upstream.shape() {
        return Err(Error::shape("softmax backward", output.shape_str(), upstream.shape_str()));
    }
    let dot: f64 = output.data.iter().zip(upstream.data.iter()).map(|(p, g)| p * g).sum();
    let mut dx: Array2<f64> = upstream.data.clone();
    dx.zip_mut_with(&output.data, |g, &p| *g = p * (*g - dot));
    Ok(Tensor2D::new(dx))
}

/// `(N, d)` → `(1, N·d)`, channel-major.
pub fn flatten(x: &Tensor2D) -> Tensor2D {
    let n = x.channels() * x.length();
    Tensor2D::new(
        x.data
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((1, n))
            .expect("contiguous reshape"),
    )
}

pub fn unflatten(x: &Tensor2D, channels: usize, length: usize) -> Result<Tensor2D> {
    if x.channels() * x.length() != channels * length {
        return Err(Error::shape("unflatten", format!("({channels}, {length})"), x.shape_str()));
    }
    Tensor2D::from_vec(channels, length, x.data.iter().cloned().collect())
}
