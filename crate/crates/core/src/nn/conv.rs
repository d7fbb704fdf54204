use ndarray::{Array2, Axis};
use rand::Rng;

use super::init::glorot_uniform;
use super::Tensor2D;
use crate::error::{Error, Result};

/// Valid (unpadded) 1D convolution in the cross-correlation convention.
///
/// Weights are stored as `(out_channels, in_channels * kernel_len)` with the
/// kernel taps of each input channel contiguous, so the forward pass is a
/// single matrix product against the unfolded input.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d {
    in_channels: usize,
    out_channels: usize,
    kernel_len: usize,
    stride: usize,
    pub weight: Tensor2D,
    pub bias: Tensor2D,
    pub trainable: bool,
}

#[derive(Debug, Clone)]
pub struct Conv1dGrads {
    pub input: Option<Tensor2D>,
    pub weight: Array2<f64>,
    pub bias: Array2<f64>,
}

/// `floor((len - window) / stride) + 1`, or `None` when the window does not fit.
pub fn valid_output_len(in_len: usize, window: usize, stride: usize) -> Option<usize> {
    if window == 0 || stride == 0 || in_len < window {
        None
    } else {
        Some((in_len - window) / stride + 1)
    }
}

impl Conv1d {
    /// Zero-initialized layer.
    pub fn new(in_channels: usize, out_channels: usize, kernel_len: usize, stride: usize) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 || kernel_len == 0 || stride == 0 {
            return Err(Error::InvalidArgument(format!(
                "conv dimensions must be positive: in {in_channels}, out {out_channels}, kernel {kernel_len}, stride {stride}"
            )));
        }
        Ok(Self {
            in_channels,
            out_channels,
            kernel_len,
            stride,
            weight: Tensor2D::param(Array2::zeros((out_channels, in_channels * kernel_len))),
            bias: Tensor2D::param(Array2::zeros((out_channels, 1))),
            trainable: true,
        })
    }

    pub fn glorot<R: Rng + ?Sized>(
        in_channels: usize,
        out_channels: usize,
        kernel_len: usize,
        stride: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut layer = Self::new(in_channels, out_channels, kernel_len, stride)?;
        layer.weight = Tensor2D::param(glorot_uniform(
            out_channels,
            in_channels * kernel_len,
            in_channels * kernel_len,
            out_channels * kernel_len,
            rng,
        ));
        Ok(layer)
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn kernel_len(&self) -> usize {
        self.kernel_len
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn param_count(&self) -> usize {
        self.out_channels * self.in_channels * self.kernel_len + self.out_channels
    }

    /// Taps of output channel `o`, input channel `c`.
    pub fn kernel(&self, o: usize, c: usize) -> &[f64] {
        let start = c * self.kernel_len;
        &self.weight.data.row(o).to_slice().expect("contiguous row")[start..start + self.kernel_len]
    }

    pub fn output_len(&self, in_len: usize) -> Result<usize> {
        valid_output_len(in_len, self.kernel_len, self.stride).ok_or_else(|| {
            Error::shape(
                "conv1d",
                format!("input length >= {}", self.kernel_len),
                format!("length {in_len}"),
            )
        })
    }

    fn check_input(&self, x: &Tensor2D) -> Result<usize> {
        if x.channels() != self.in_channels {
            return Err(Error::shape(
                "conv1d",
                format!("({}, >= {})", self.in_channels, self.kernel_len),
                x.shape_str(),
            ));
        }
        self.output_len(x.length())
    }

    /// Unfolds the input into `(in_channels * kernel_len, out_len)` columns.
    fn unfold(&self, x: &Tensor2D, out_len: usize) -> Array2<f64> {
        let k = self.kernel_len;
        let mut cols = Array2::zeros((self.in_channels * k, out_len));
        for c in 0..self.in_channels {
            let src = x.data.row(c);
            for j in 0..k {
                let mut dst = cols.row_mut(c * k + j);
                for (t, d) in dst.iter_mut().enumerate() {
                    *d = src[t * self.stride + j];
                }
            }
        }
        cols
    }

    pub fn forward(&self, x: &Tensor2D) -> Result<Tensor2D> {
        let out_len = self.check_input(x)?;
        let cols = self.unfold(x, out_len);
        let mut out = self.weight.data.dot(&cols);
        out += &self.bias.data;
        Ok(Tensor2D::new(out))
    }

    /// Gradients of the forward map. Input gradient is skipped when
    /// `need_input` is false (first layer of a network).
    pub fn backward_select(&self, x: &Tensor2D, upstream: &Tensor2D, need_input: bool) -> Result<Conv1dGrads> {
        let out_len = self.check_input(x)?;
        if upstream.shape() != (self.out_channels, out_len) {
            return Err(Error::shape(
                "conv1d backward",
                format!("({}, {})", self.out_channels, out_len),
                upstream.shape_str(),
            ));
        }
        let cols = self.unfold(x, out_len);
        let dy = &upstream.data;
        let weight = dy.dot(&cols.t());
        let bias = dy.sum_axis(Axis(1)).insert_axis(Axis(1));

        let input = if need_input {
            let dcols = self.weight.data.t().dot(dy);
            let k = self.kernel_len;
            let mut dx = Array2::zeros((self.in_channels, x.length()));
            for c in 0..self.in_channels {
                let mut dst = dx.row_mut(c);
                for j in 0..k {
                    let src = dcols.row(c * k + j);
                    for (t, &g) in src.iter().enumerate() {
                        dst[t * self.stride + j] += g;
                    }
                }
            }
            Some(Tensor2D::new(dx))
        } else {
            None
        };
        Ok(Conv1dGrads { input, weight, bias })
    }

    pub fn backward(&self, x: &Tensor2D, upstream: &Tensor2D) -> Result<Conv1dGrads> {
        self.backward_select(x, upstream, true)
    }
}

pub fn conv1d_forward(layer: &Conv1d, x: &Tensor2D) -> Result<Tensor2D> {
    layer.forward(x)
}

pub fn conv1d_backward(layer: &Conv1d, x: &Tensor2D, upstream: &Tensor2D) -> Result<(Tensor2D, Array2<f64>, Array2<f64>)> {
    let g = layer.backward(x, upstream)?;
    Ok((g.input.expect("input gradient requested"), g.weight, g.bias))
}
