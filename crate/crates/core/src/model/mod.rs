//! Network configurations, construction, parameter accounting and checkpoints.

mod checkpoint;
mod config;
mod network;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::{ConfigName, LayerSpec, ModelConfig, DROPOUT_P, FC_DIMS, N_CLASSES};
pub use network::{build, count_parameters, Model, StageShape, Tape};
