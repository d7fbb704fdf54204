//! Hand-differentiated layer primitives for 1D convolutional networks.

mod activation;
mod batchnorm;
mod conv;
mod dense;
mod dropout;
mod init;
mod layer;
mod loss;
mod pool;
mod tensor;

pub use activation::{flatten, relu, relu_backward, softmax, softmax_backward, unflatten};
pub use batchnorm::{batchnorm_forward, BatchNorm, BatchNormCache, DEFAULT_EPSILON, DEFAULT_MOMENTUM};
pub use conv::{conv1d_backward, conv1d_forward, valid_output_len, Conv1d, Conv1dGrads};
pub use dense::{dense_backward, dense_forward, Dense};
pub use dropout::Dropout;
pub use init::glorot_uniform;
pub use layer::{Cache, Layer, Mode, ParamRef};
pub use loss::msle_loss;
pub use pool::{maxpool1d, MaxPool1d, PoolOutput};
pub use tensor::Tensor2D;
