use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;

use super::activation::{flatten, relu, relu_backward, softmax, softmax_backward, unflatten};
use super::batchnorm::BatchNormCache;
use super::{BatchNorm, Conv1d, Dense, Dropout, MaxPool1d, Tensor2D};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// One stage of a sequential network.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv1d(Conv1d),
    Relu,
    BatchNorm(BatchNorm),
    MaxPool(MaxPool1d),
    Flatten,
    Dense(Dense),
    Dropout(Dropout),
    Softmax,
}

/// What a training forward pass remembers for backward.
#[derive(Debug, Clone)]
pub enum Cache {
    Inputs(Vec<Tensor2D>),
    Outputs(Vec<Tensor2D>),
    BatchNorm(BatchNormCache),
    Pool { argmax: Vec<Array2<usize>>, in_len: usize },
    Flatten { channels: usize, length: usize },
    Masks(Vec<Array2<f64>>),
}

/// Mutable view of one parameter block and its accumulated gradient.
pub struct ParamRef<'a> {
    pub value: &'a mut [f64],
    pub grad: &'a [f64],
    pub trainable: bool,
}

fn param_ref(t: &mut Tensor2D, trainable: bool) -> ParamRef<'_> {
    let Tensor2D { data, grad } = t;
    ParamRef {
        value: data.as_slice_mut().expect("standard layout"),
        grad: grad.as_ref().expect("parameter gradient slot").as_slice().expect("standard layout"),
        trainable,
    }
}

fn accumulate(t: &mut Tensor2D, g: &Array2<f64>) {
    *t.grad.as_mut().expect("parameter gradient slot") += g;
}

fn cache_mismatch(layer: &Layer) -> Error {
    Error::InvalidArgument(format!("backward cache does not belong to {} layer", layer.kind_name()))
}

impl Layer {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Layer::Conv1d(_) => "conv1d",
            Layer::Relu => "relu",
            Layer::BatchNorm(_) => "batchnorm",
            Layer::MaxPool(_) => "maxpool",
            Layer::Flatten => "flatten",
            Layer::Dense(_) => "dense",
            Layer::Dropout(_) => "dropout",
            Layer::Softmax => "softmax",
        }
    }

    /// `(total, trainable)` parameter counts. Batch norm contributes its
    /// affine pair per channel; running statistics are not parameters.
    pub fn param_counts(&self) -> (usize, usize) {
        match self {
            Layer::Conv1d(c) => (c.param_count(), if c.trainable { c.param_count() } else { 0 }),
            Layer::BatchNorm(b) => (b.param_count(), b.param_count()),
            Layer::Dense(d) => (d.param_count(), d.param_count()),
            _ => (0, 0),
        }
    }

    /// Output shape for an input of shape `(channels, length)`.
    pub fn output_shape(&self, (channels, length): (usize, usize)) -> Result<(usize, usize)> {
        match self {
            Layer::Conv1d(c) => {
                if channels != c.in_channels() {
                    return Err(Error::shape("conv1d", format!("{} channels", c.in_channels()), format!("({channels}, {length})")));
                }
                Ok((c.out_channels(), c.output_len(length)?))
            }
            Layer::MaxPool(p) => Ok((channels, p.output_len(length)?)),
            Layer::BatchNorm(b) => {
                if channels != b.channels() {
                    return Err(Error::shape("batchnorm", format!("{} channels", b.channels()), format!("({channels}, {length})")));
                }
                Ok((channels, length))
            }
            Layer::Flatten => Ok((1, channels * length)),
            Layer::Dense(d) => {
                if (channels, length) != (1, d.in_dim()) {
                    return Err(Error::shape("dense", format!("(1, {})", d.in_dim()), format!("({channels}, {length})")));
                }
                Ok((1, d.out_dim()))
            }
            Layer::Relu | Layer::Dropout(_) | Layer::Softmax => Ok((channels, length)),
        }
    }

    /// Eval-mode forward of one sample; never mutates the layer.
    pub fn infer(&self, x: &Tensor2D) -> Result<Tensor2D> {
        match self {
            Layer::Conv1d(c) => c.forward(x),
            Layer::Relu => Ok(relu(x)),
            Layer::BatchNorm(b) => b.infer(x),
            Layer::MaxPool(p) => Ok(p.forward(x)?.output),
            Layer::Flatten => Ok(flatten(x)),
            Layer::Dense(d) => d.forward(x),
            Layer::Dropout(_) => Ok(x.clone()),
            Layer::Softmax => softmax(x),
        }
    }

    /// Training-mode forward over a batch.
    pub fn forward_train<R: Rng + ?Sized>(&mut self, xs: Vec<Tensor2D>, rng: &mut R) -> Result<(Vec<Tensor2D>, Cache)> {
        match self {
            Layer::Conv1d(c) => {
                let c = &*c;
                let ys = xs.par_iter().map(|x| c.forward(x)).collect::<Result<Vec<_>>>()?;
                Ok((ys, Cache::Inputs(xs)))
            }
            Layer::Relu => {
                let ys = xs.iter().map(relu).collect();
                Ok((ys, Cache::Inputs(xs)))
            }
            Layer::BatchNorm(b) => {
                let (ys, cache) = b.forward_train(&xs)?;
                Ok((ys, Cache::BatchNorm(cache)))
            }
            Layer::MaxPool(p) => {
                let in_len = xs.first().map(|x| x.length()).unwrap_or(0);
                let outs = xs.par_iter().map(|x| p.forward(x)).collect::<Result<Vec<_>>>()?;
                let (ys, argmax) = outs.into_iter().map(|o| (o.output, o.argmax)).unzip();
                Ok((ys, Cache::Pool { argmax, in_len }))
            }
            Layer::Flatten => {
                let (channels, length) = xs.first().map(|x| x.shape()).unwrap_or((0, 0));
                Ok((xs.iter().map(flatten).collect(), Cache::Flatten { channels, length }))
            }
            Layer::Dense(d) => {
                let ys = xs.iter().map(|x| d.forward(x)).collect::<Result<Vec<_>>>()?;
                Ok((ys, Cache::Inputs(xs)))
            }
            Layer::Dropout(d) => {
                let (ys, masks) = xs.iter().map(|x| d.forward_train(x, rng)).unzip();
                Ok((ys, Cache::Masks(masks)))
            }
            Layer::Softmax => {
                let ys = xs.iter().map(softmax).collect::<Result<Vec<_>>>()?;
                Ok((ys.clone(), Cache::Outputs(ys)))
            }
        }
    }

    /// Backward over a batch; parameter gradients are summed into the
    /// layers' gradient slots. When `need_input` is false the returned
    /// vector may be empty.
    pub fn backward(&mut self, cache: &Cache, grads: Vec<Tensor2D>, need_input: bool) -> Result<Vec<Tensor2D>> {
        match (&mut *self, cache) {
            (Layer::Conv1d(c), Cache::Inputs(xs)) => {
                let layer = &*c;
                let per_sample = xs
                    .par_iter()
                    .zip(grads.par_iter())
                    .map(|(x, g)| layer.backward_select(x, g, need_input))
                    .collect::<Result<Vec<_>>>()?;
                let mut inputs = Vec::with_capacity(per_sample.len());
                for g in per_sample {
                    accumulate(&mut c.weight, &g.weight);
                    accumulate(&mut c.bias, &g.bias);
                    if let Some(dx) = g.input {
                        inputs.push(dx);
                    }
                }
                Ok(inputs)
            }
            (Layer::Relu, Cache::Inputs(xs)) => xs.iter().zip(&grads).map(|(x, g)| relu_backward(x, g)).collect(),
            (Layer::BatchNorm(b), Cache::BatchNorm(cache)) => {
                let (inputs, dgamma, dbeta) = b.backward(cache, &grads)?;
                accumulate(&mut b.gamma, &dgamma);
                accumulate(&mut b.beta, &dbeta);
                Ok(inputs)
            }
            (Layer::MaxPool(p), Cache::Pool { argmax, in_len }) => argmax
                .iter()
                .zip(&grads)
                .map(|(a, g)| p.backward(a, g, *in_len))
                .collect(),
            (Layer::Flatten, Cache::Flatten { channels, length }) => {
                grads.iter().map(|g| unflatten(g, *channels, *length)).collect()
            }
            (Layer::Dense(d), Cache::Inputs(xs)) => {
                let mut inputs = Vec::with_capacity(xs.len());
                for (x, g) in xs.iter().zip(&grads) {
                    let (dx, dw, db) = d.backward(x, g)?;
                    accumulate(&mut d.weight, &dw);
                    accumulate(&mut d.bias, &db);
                    inputs.push(dx);
                }
                Ok(inputs)
            }
            (Layer::Dropout(_), Cache::Masks(masks)) => {
                masks.iter().zip(&grads).map(|(m, g)| Dropout::backward(m, g)).collect()
            }
            (Layer::Softmax, Cache::Outputs(ys)) => ys.iter().zip(&grads).map(|(y, g)| softmax_backward(y, g)).collect(),
            (layer, _) => Err(cache_mismatch(layer)),
        }
    }

    pub fn params_mut(&mut self) -> Vec<ParamRef<'_>> {
        match self {
            Layer::Conv1d(c) => {
                let trainable = c.trainable;
                vec![param_ref(&mut c.weight, trainable), param_ref(&mut c.bias, trainable)]
            }
            Layer::BatchNorm(b) => vec![param_ref(&mut b.gamma, true), param_ref(&mut b.beta, true)],
            Layer::Dense(d) => vec![param_ref(&mut d.weight, true), param_ref(&mut d.bias, true)],
            _ => Vec::new(),
        }
    }

    pub fn zero_grad(&mut self) {
        match self {
            Layer::Conv1d(c) => {
                c.weight.zero_grad();
                c.bias.zero_grad();
            }
            Layer::BatchNorm(b) => {
                b.gamma.zero_grad();
                b.beta.zero_grad();
            }
            Layer::Dense(d) => {
                d.weight.zero_grad();
                d.bias.zero_grad();
            }
            _ => {}
        }
    }
}
