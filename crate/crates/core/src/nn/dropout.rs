use ndarray::Array2;
use rand::Rng;

use super::Tensor2D;
use crate::error::{Error, Result};

/// Inverted dropout: survivors are scaled by `1 / (1 - p)` during training so
/// evaluation is the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dropout {
    p: f64,
}

impl Dropout {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("degenerate dropout probability {p}")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Samples a keep-mask (already scaled) and applies it.
    pub fn forward_train<R: Rng + ?Sized>(&self, x: &Tensor2D, rng: &mut R) -> (Tensor2D, Array2<f64>) {
        let scale = 1.0 / (1.0 - self.p);
        let mask = Array2::from_shape_simple_fn(x.data.raw_dim(), || {
            if self.p > 0.0 && rng.gen::<f64>() < self.p {
                0.0
            } else {
                scale
            }
        });
        (Tensor2D::new(&x.data * &mask), mask)
    }

    pub fn backward(mask: &Array2<f64>, upstream: &Tensor2D) -> Result<Tensor2D> {
        if mask.dim() != upstream.data.dim() {
            return Err(Error::shape("dropout backward", format!("{:?}", mask.dim()), upstream.shape_str()));
        }
        Ok(Tensor2D::new(&upstream.data * mask))
    }
}
