use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ConfigName, LayerSpec, ModelConfig};
use crate::error::{Error, Result};
use crate::gammatone::{make_bank, GammatoneBank};
use crate::nn::{msle_loss, BatchNorm, Cache, Conv1d, Dense, Dropout, Layer, MaxPool1d, Mode, ParamRef, Tensor2D};
use crate::optim::Adadelta;

/// A sequential 1D CNN built from a [`ModelConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    config: ModelConfig,
    layers: Vec<Layer>,
    mode: Mode,
}

/// Output shape after a named convolution or pooling stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageShape {
    pub label: String,
    pub channels: usize,
    pub length: usize,
}

/// Per-layer caches from one training forward pass.
#[derive(Debug)]
pub struct Tape {
    caches: Vec<Cache>,
}

fn gammatone_layer(filters: usize, size: usize, stride: usize) -> Result<Conv1d> {
    let bank: GammatoneBank = if (filters, size) == (64, 512) {
        GammatoneBank::standard()
    } else {
        make_bank(filters, 100.0, 8000.0, size, 16_000)?
    };
    let mut layer = Conv1d::new(1, filters, size, stride)?;
    for (mut row, kernel) in layer.weight.data.rows_mut().into_iter().zip(bank.kernels()) {
        row.iter_mut().zip(kernel).for_each(|(w, &k)| *w = k);
    }
    layer.trainable = false;
    Ok(layer)
}

impl Model {
    /// Builds a named configuration with seeded Glorot initialization.
    pub fn build(name: ConfigName, seed: u64) -> Result<Self> {
        Self::from_config(ModelConfig::new(name), seed)
    }

    pub fn from_config(config: ModelConfig, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_config_with_rng(config, &mut rng)
    }

    pub fn from_config_with_rng<R: Rng + ?Sized>(config: ModelConfig, rng: &mut R) -> Result<Self> {
        let mut layers = Vec::new();
        let (mut channels, mut length) = (1usize, config.input_len);
        for (i, spec) in config.conv_stack.iter().enumerate() {
            match *spec {
                LayerSpec::Conv { filters, size, stride } => {
                    let conv = if i == 0 && config.gammatone_first_layer {
                        gammatone_layer(filters, size, stride)?
                    } else {
                        Conv1d::glorot(channels, filters, size, stride, rng)?
                    };
                    length = conv.output_len(length)?;
                    channels = filters;
                    layers.push(Layer::Conv1d(conv));
                    layers.push(Layer::Relu);
                    layers.push(Layer::BatchNorm(BatchNorm::new(filters)));
                }
                LayerSpec::Pool { size, stride } => {
                    let pool = MaxPool1d::new(size, stride)?;
                    length = pool.output_len(length)?;
                    layers.push(Layer::MaxPool(pool));
                }
            }
        }
        layers.push(Layer::Flatten);
        let mut width = channels * length;
        for &hidden in &config.fc_dims {
            layers.push(Layer::Dense(Dense::glorot(width, hidden, rng)));
            layers.push(Layer::Relu);
            layers.push(Layer::Dropout(Dropout::new(config.dropout_p)?));
            width = hidden;
        }
        layers.push(Layer::Dense(Dense::glorot(width, config.n_classes, rng)));
        layers.push(Layer::Softmax);
        Ok(Self {
            config,
            layers,
            mode: Mode::Eval,
        })
    }

    /// Assembles a model from explicit layers. The layer structure is not
    /// checked against `config`.
    pub(crate) fn from_parts(config: ModelConfig, layers: Vec<Layer>) -> Self {
        Self {
            config,
            layers,
            mode: Mode::Eval,
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn input_len(&self) -> usize {
        self.config.input_len
    }

    pub fn n_classes(&self) -> usize {
        self.config.n_classes
    }

    /// `(total, trainable)` parameter counts.
    pub fn count_parameters(&self) -> (usize, usize) {
        self.layers
            .iter()
            .map(Layer::param_counts)
            .fold((0, 0), |(t, tr), (a, b)| (t + a, tr + b))
    }

    /// Shapes after every convolution and pooling stage, labelled CL1.., PL1...
    pub fn stage_shapes(&self) -> Result<Vec<StageShape>> {
        let mut shape = (1, self.config.input_len);
        let (mut n_conv, mut n_pool) = (0, 0);
        let mut out = Vec::new();
        for layer in &self.layers {
            shape = layer.output_shape(shape)?;
            let label = match layer {
                Layer::Conv1d(_) => {
                    n_conv += 1;
                    format!("CL{n_conv}")
                }
                Layer::MaxPool(_) => {
                    n_pool += 1;
                    format!("PL{n_pool}")
                }
                _ => continue,
            };
            out.push(StageShape {
                label,
                channels: shape.0,
                length: shape.1,
            });
        }
        Ok(out)
    }

    /// Indices into [`Model::layers`] of the convolution layers.
    pub fn conv_layer_indices(&self) -> Vec<usize> {
        self.layers
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l, Layer::Conv1d(_)))
            .map(|(i, _)| i)
            .collect()
    }

    /// The `n`-th convolution layer (0-based).
    pub fn conv(&self, n: usize) -> Option<&Conv1d> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                Layer::Conv1d(c) => Some(c),
                _ => None,
            })
            .nth(n)
    }

    pub fn conv_mut(&mut self, n: usize) -> Option<&mut Conv1d> {
        self.layers
            .iter_mut()
            .filter_map(|l| match l {
                Layer::Conv1d(c) => Some(c),
                _ => None,
            })
            .nth(n)
    }

    fn check_frame(&self, frame: &[f64]) -> Result<()> {
        if frame.len() != self.config.input_len {
            return Err(Error::shape(
                "model input",
                format!("(1, {}) for {}", self.config.input_len, self.config.id()),
                format!("(1, {})", frame.len()),
            ));
        }
        Ok(())
    }

    /// Eval-mode class posteriors for one frame. Pure: takes `&self`.
    pub fn predict(&self, frame: &[f64]) -> Result<Vec<f64>> {
        self.check_frame(frame)?;
        let mut x = Tensor2D::from_signal(frame);
        for layer in &self.layers {
            x = layer.infer(&x)?;
        }
        Ok(x.data.into_raw_vec_and_offset().0)
    }

    /// Eval-mode forward through the first `n_layers` layers.
    pub fn forward_prefix(&self, frame: &[f64], n_layers: usize) -> Result<Tensor2D> {
        self.check_frame(frame)?;
        let mut x = Tensor2D::from_signal(frame);
        for layer in self.layers.iter().take(n_layers) {
            x = layer.infer(&x)?;
        }
        Ok(x)
    }

    /// Training-mode forward over a batch of frames.
    pub fn forward_train<R: Rng + ?Sized>(&mut self, frames: &[&[f64]], rng: &mut R) -> Result<(Vec<Vec<f64>>, Tape)> {
        for f in frames {
            self.check_frame(f)?;
        }
        let mut xs: Vec<Tensor2D> = frames.iter().map(|f| Tensor2D::from_signal(f)).collect();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &mut self.layers {
            let (ys, cache) = layer.forward_train(xs, rng)?;
            caches.push(cache);
            xs = ys;
        }
        let outputs = xs.into_iter().map(|t| t.data.into_raw_vec_and_offset().0).collect();
        Ok((outputs, Tape { caches }))
    }

    /// Backpropagates output gradients and accumulates parameter gradients.
    pub fn backward(&mut self, tape: &Tape, output_grads: Vec<Vec<f64>>) -> Result<()> {
        let k = self.config.n_classes;
        let mut grads = output_grads
            .into_iter()
            .map(|g| Tensor2D::from_vec(1, k, g))
            .collect::<Result<Vec<_>>>()?;
        for (i, (layer, cache)) in self.layers.iter_mut().zip(&tape.caches).enumerate().rev() {
            // A frozen input layer has nothing to learn and nothing upstream.
            if i == 0 && matches!(layer, Layer::Conv1d(c) if !c.trainable) {
                break;
            }
            grads = layer.backward(cache, grads, i > 0)?;
        }
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        self.layers.iter_mut().for_each(Layer::zero_grad);
    }

    pub fn params_mut(&mut self) -> Vec<ParamRef<'_>> {
        self.layers.iter_mut().flat_map(Layer::params_mut).collect()
    }

    /// All parameter values in layer order, including frozen layers.
    pub fn parameter_vector(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Conv1d(c) => {
                    out.extend(c.weight.data.iter());
                    out.extend(c.bias.data.iter());
                }
                Layer::BatchNorm(b) => {
                    out.extend(b.gamma.data.iter());
                    out.extend(b.beta.data.iter());
                }
                Layer::Dense(d) => {
                    out.extend(d.weight.data.iter());
                    out.extend(d.bias.data.iter());
                }
                _ => {}
            }
        }
        out
    }

    /// One optimizer step on a labelled batch: forward, mean MSLE over the
    /// batch against one-hot targets, backward, Adadelta update. Returns the
    /// batch loss.
    pub fn train_step<R: Rng + ?Sized>(
        &mut self,
        frames: &[&[f64]],
        labels: &[usize],
        optimizer: &mut Adadelta,
        rng: &mut R,
    ) -> Result<f64> {
        if frames.len() != labels.len() {
            return Err(Error::shape(
                "train_step",
                format!("{} labels", frames.len()),
                format!("{} labels", labels.len()),
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= self.config.n_classes) {
            return Err(Error::InvalidArgument(format!("label {bad} out of range")));
        }
        self.mode = Mode::Train;
        self.zero_grad();
        let (outputs, tape) = self.forward_train(frames, rng)?;
        let batch = frames.len() as f64;
        let mut total = 0.0;
        let mut grads = Vec::with_capacity(outputs.len());
        for (pred, &label) in outputs.iter().zip(labels) {
            let mut target = vec![0.0; self.config.n_classes];
            target[label] = 1.0;
            let (loss, g) = msle_loss(pred, &target)?;
            total += loss;
            grads.push(g.into_iter().map(|v| v / batch).collect());
        }
        self.backward(&tape, grads)?;
        optimizer.step(self.params_mut())?;
        Ok(total / batch)
    }

    /// Dense weights and biases as arrays, for inspection.
    pub fn dense_layers(&self) -> Vec<&Dense> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                Layer::Dense(d) => Some(d),
                _ => None,
            })
            .collect()
    }
}

pub fn build(name: &str, seed: u64) -> Result<Model> {
    Model::from_config(ModelConfig::from_id(name)?, seed)
}

pub fn count_parameters(model: &Model) -> (usize, usize) {
    model.count_parameters()
}
