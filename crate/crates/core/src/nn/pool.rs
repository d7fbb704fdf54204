use ndarray::Array2;

use super::conv::valid_output_len;
use super::Tensor2D;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxPool1d {
    pub pool_len: usize,
    pub stride: usize,
}

/// Forward output plus, for every output element, the input column that held
/// the maximum (first one on ties).
#[derive(Debug, Clone)]
pub struct PoolOutput {
    pub output: Tensor2D,
    pub argmax: Array2<usize>,
}

impl MaxPool1d {
    pub fn new(pool_len: usize, stride: usize) -> Result<Self> {
        if pool_len == 0 || stride == 0 {
            return Err(Error::InvalidArgument("pool length and stride must be positive".into()));
        }
        Ok(Self { pool_len, stride })
    }

    pub fn output_len(&self, in_len: usize) -> Result<usize> {
        valid_output_len(in_len, self.pool_len, self.stride).ok_or_else(|| {
            Error::shape("maxpool1d", format!("length >= {}", self.pool_len), format!("length {in_len}"))
        })
    }

    pub fn forward(&self, x: &Tensor2D) -> Result<PoolOutput> {
        let out_len = self.output_len(x.length())?;
        let channels = x.channels();
        let mut out = Array2::zeros((channels, out_len));
        let mut argmax = Array2::zeros((channels, out_len));
        for c in 0..channels {
            let row = x.data.row(c);
            for t in 0..out_len {
                let start = t * self.stride;
                let mut best = start;
                for i in start + 1..start + self.pool_len {
                    if row[i] > row[best] {
                        best = i;
                    }
                }
                out[[c, t]] = row[best];
                argmax[[c, t]] = best;
            }
        }
        Ok(PoolOutput {
            output: Tensor2D::new(out),
            argmax,
        })
    }

    /// Routes each upstream gradient to the input position that won the forward max.
    pub fn backward(&self, argmax: &Array2<usize>, upstream: &Tensor2D, in_len: usize) -> Result<Tensor2D> {
        if upstream.data.dim() != argmax.dim() {
            return Err(Error::shape(
                "maxpool1d backward",
                format!("{:?}", argmax.dim()),
                upstream.shape_str(),
            ));
        }
        let mut dx = Array2::zeros((upstream.channels(), in_len));
        for ((c, t), &g) in upstream.data.indexed_iter() {
            dx[[c, argmax[[c, t]]]] += g;
        }
        Ok(Tensor2D::new(dx))
    }
}

pub fn maxpool1d(x: &Tensor2D, pool_len: usize, stride: usize) -> Result<PoolOutput> {
    MaxPool1d::new(pool_len, stride)?.forward(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn table_lengths() {
        let p = MaxPool1d::new(8, 8).unwrap();
        assert_eq!(p.output_len(7_969).unwrap(), 996);
        assert_eq!(p.output_len(15_489).unwrap(), 1_936);
    }

    #[test]
    fn forward_and_backward_direct() {
        let x = Tensor2D::from_signal(&[3.0, 1.0, 2.0, 5.0]);
        let p = MaxPool1d::new(2, 2).unwrap();
        let out = p.forward(&x).unwrap();
        assert_eq!(out.output.data, array![[3.0, 5.0]]);
        let dx = p.backward(&out.argmax, &Tensor2D::from_signal(&[1.0, 1.0]), 4).unwrap();
        assert_eq!(dx.data, array![[1.0, 0.0, 0.0, 1.0]]);
    }

    #[test]
    fn ties_route_to_first() {
        let x = Tensor2D::from_signal(&[2.0, 2.0, 2.0]);
        let out = maxpool1d(&x, 3, 1).unwrap();
        assert_eq!(out.argmax[[0, 0]], 0);
    }

    #[test]
    fn too_long_pool_is_shape_error() {
        assert!(matches!(maxpool1d(&Tensor2D::zeros(1, 3), 4, 1), Err(Error::Shape { .. })));
    }
}
