use ndarray::{Array2, Axis};
use rand::Rng;

use super::init::glorot_uniform;
use super::Tensor2D;
use crate::error::{Error, Result};

/// Fully connected layer acting on `(1, in_dim)` row vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    in_dim: usize,
    out_dim: usize,
    /// `(out_dim, in_dim)`
    pub weight: Tensor2D,
    /// `(1, out_dim)`
    pub bias: Tensor2D,
}

impl Dense {
    pub fn new(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weight: Tensor2D::param(Array2::zeros((out_dim, in_dim))),
            bias: Tensor2D::param(Array2::zeros((1, out_dim))),
        }
    }

    pub fn glorot<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let mut d = Self::new(in_dim, out_dim);
        d.weight = Tensor2D::param(glorot_uniform(out_dim, in_dim, in_dim, out_dim, rng));
        d
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn param_count(&self) -> usize {
        self.out_dim * (self.in_dim + 1)
    }

    fn check(&self, x: &Tensor2D) -> Result<()> {
        if x.shape() != (1, self.in_dim) {
            return Err(Error::shape("dense", format!("(1, {})", self.in_dim), x.shape_str()));
        }
        Ok(())
    }

    pub fn forward(&self, x: &Tensor2D) -> Result<Tensor2D> {
        self.check(x)?;
        let mut y = x.data.dot(&self.weight.data.t());
        y += &self.bias.data;
        Ok(Tensor2D::new(y))
    }

    /// Returns `(input grad, weight grad, bias grad)`.
    pub fn backward(&self, x: &Tensor2D, upstream: &Tensor2D) -> Result<(Tensor2D, Array2<f64>, Array2<f64>)> {
        self.check(x)?;
        if upstream.shape() != (1, self.out_dim) {
            return Err(Error::shape("dense backward", format!("(1, {})", self.out_dim), upstream.shape_str()));
        }
        let dx = upstream.data.dot(&self.weight.data);
        let dw = upstream.data.t().dot(&x.data);
        let db = upstream.data.sum_axis(Axis(0)).insert_axis(Axis(0));
        Ok((Tensor2D::new(dx), dw, db))
    }
}

pub fn dense_forward(layer: &Dense, x: &Tensor2D) -> Result<Tensor2D> {
    layer.forward(x)
}

pub fn dense_backward(layer: &Dense, x: &Tensor2D, upstream: &Tensor2D) -> Result<(Tensor2D, Array2<f64>, Array2<f64>)> {
    layer.backward(x, upstream)
}
