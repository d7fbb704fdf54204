//! End-to-end 1D convolutional networks for environmental sound
//! classification from raw waveforms.

pub mod analysis;
pub mod audio;
pub mod error;
pub mod fsutil;
pub mod gammatone;
pub mod harness;
pub mod inference;
pub mod model;
pub mod nn;
pub mod optim;

pub use error::{Error, Result};
