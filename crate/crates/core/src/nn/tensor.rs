use ndarray::Array2;

use crate::error::{Error, Result};

/// A `(channels, length)` block of reals with an optional gradient of the same shape.
///
/// Used both for activations flowing through the network and for parameter
/// matrices, where the gradient slot accumulates backpropagated error.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2D {
    pub data: Array2<f64>,
    pub grad: Option<Array2<f64>>,
}

impl Tensor2D {
    pub fn new(data: Array2<f64>) -> Self {
        Self { data, grad: None }
    }

    pub fn zeros(channels: usize, length: usize) -> Self {
        Self::new(Array2::zeros((channels, length)))
    }

    /// Builds from channel-major values, checking the element count.
    pub fn from_vec(channels: usize, length: usize, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let data = Array2::from_shape_vec((channels, length), values)
            .map_err(|_| Error::shape("tensor", format!("{} values", channels * length), format!("{n} values")))?;
        Ok(Self::new(data))
    }

    /// A single-channel tensor holding one frame of audio.
    pub fn from_signal(values: &[f64]) -> Self {
        Self::new(Array2::from_shape_vec((1, values.len()), values.to_vec()).expect("1 x n shape"))
    }

    /// A parameter tensor with a zeroed gradient slot.
    pub fn param(data: Array2<f64>) -> Self {
        let grad = Array2::zeros(data.raw_dim());
        Self { data, grad: Some(grad) }
    }

    pub fn channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn length(&self) -> usize {
        self.data.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.channels(), self.length())
    }

    pub fn shape_str(&self) -> String {
        format!("({}, {})", self.channels(), self.length())
    }

    pub fn zero_grad(&mut self) {
        if let Some(g) = self.grad.as_mut() {
            g.fill(0.0);
        }
    }

    pub fn values(&self) -> &[f64] {
        self.data.as_slice().expect("standard layout")
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        self.data.as_slice_mut().expect("standard layout")
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
