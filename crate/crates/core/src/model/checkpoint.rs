//! Binary checkpoint container.
//!
//! ```text
//! magic       b"W1DC"
//! version     u16
//! config id   u16 length + UTF-8 bytes
//! layers      u32 count, then per layer:
//!               kind tag u8, shape count u8, shape values u32 each,
//!               parameter count u32, parameters as f64
//! crc32       u32 over every preceding byte
//! ```
//!
//! All integers and floats are little-endian.

use std::path::Path;

use ndarray::Array2;

use super::{Model, ModelConfig};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::nn::{BatchNorm, Conv1d, Dense, Dropout, Layer, MaxPool1d, Tensor2D};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"W1DC";
pub const CHECKPOINT_VERSION: u16 = 1;

const TAG_CONV: u8 = 1;
const TAG_RELU: u8 = 2;
const TAG_BATCHNORM: u8 = 3;
const TAG_POOL: u8 = 4;
const TAG_FLATTEN: u8 = 5;
const TAG_DENSE: u8 = 6;
const TAG_DROPOUT: u8 = 7;
const TAG_SOFTMAX: u8 = 8;

fn push_record(out: &mut Vec<u8>, tag: u8, shape: &[usize], values: &[f64]) {
    out.push(tag);
    out.push(shape.len() as u8);
    for &s in shape {
        out.extend_from_slice(&(s as u32).to_le_bytes());
    }
    out.extend_from_slice(&(values.len() as u32).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn collect(parts: &[&[f64]]) -> Vec<f64> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// Serializes a model to checkpoint bytes.
pub fn save_checkpoint(model: &Model) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    let id = model.config().id();
    out.extend_from_slice(&(id.len() as u16).to_le_bytes());
    out.extend_from_slice(id.as_bytes());
    out.extend_from_slice(&(model.layers().len() as u32).to_le_bytes());
    for layer in model.layers() {
        match layer {
            Layer::Conv1d(c) => push_record(
                &mut out,
                TAG_CONV,
                &[c.in_channels(), c.out_channels(), c.kernel_len(), c.stride(), usize::from(c.trainable)],
                &collect(&[c.weight.values(), c.bias.values()]),
            ),
            Layer::Relu => push_record(&mut out, TAG_RELU, &[], &[]),
            Layer::BatchNorm(b) => push_record(
                &mut out,
                TAG_BATCHNORM,
                &[b.channels()],
                &collect(&[
                    b.gamma.values(),
                    b.beta.values(),
                    &b.running_mean,
                    &b.running_var,
                    &[b.momentum, b.epsilon],
                ]),
            ),
            Layer::MaxPool(p) => push_record(&mut out, TAG_POOL, &[p.pool_len, p.stride], &[]),
            Layer::Flatten => push_record(&mut out, TAG_FLATTEN, &[], &[]),
            Layer::Dense(d) => push_record(
                &mut out,
                TAG_DENSE,
                &[d.in_dim(), d.out_dim()],
                &collect(&[d.weight.values(), d.bias.values()]),
            ),
            Layer::Dropout(d) => push_record(&mut out, TAG_DROPOUT, &[], &[d.p()]),
            Layer::Softmax => push_record(&mut out, TAG_SOFTMAX, &[], &[]),
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::Truncated)?;
        let s = self.bytes.get(self.pos..end).ok_or(Error::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let b = self.take(n.checked_mul(8).ok_or(Error::Truncated)?)?;
        Ok(b.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect())
    }
}

struct Record {
    tag: u8,
    shape: Vec<usize>,
    values: Vec<f64>,
}

fn mismatch(config: &ModelConfig, detail: impl Into<String>) -> Error {
    Error::ConfigMismatch {
        config: config.id(),
        detail: detail.into(),
    }
}

fn param(rows: usize, cols: usize, values: &[f64]) -> Tensor2D {
    Tensor2D::param(Array2::from_shape_vec((rows, cols), values.to_vec()).expect("sizes checked by caller"))
}

/// Rebuilds a layer from its record, checking it against the layer the
/// config would build at the same position.
fn restore_layer(config: &ModelConfig, expected: &Layer, rec: &Record) -> Result<Layer> {
    let want = |n: usize| -> Result<()> {
        if rec.values.len() != n {
            return Err(mismatch(
                config,
                format!("{} layer holds {} values, expected {n}", expected.kind_name(), rec.values.len()),
            ));
        }
        Ok(())
    };
    let shape_is = |s: &[usize]| -> Result<()> {
        if rec.shape != s {
            return Err(mismatch(
                config,
                format!("{} layer shape {:?}, expected {:?}", expected.kind_name(), rec.shape, s),
            ));
        }
        Ok(())
    };
    match (expected, rec.tag) {
        (Layer::Conv1d(c), TAG_CONV) => {
            shape_is(&[c.in_channels(), c.out_channels(), c.kernel_len(), c.stride(), usize::from(c.trainable)])?;
            let w = c.out_channels() * c.in_channels() * c.kernel_len();
            want(w + c.out_channels())?;
            let mut layer = Conv1d::new(c.in_channels(), c.out_channels(), c.kernel_len(), c.stride())?;
            layer.weight = param(c.out_channels(), c.in_channels() * c.kernel_len(), &rec.values[..w]);
            layer.bias = param(c.out_channels(), 1, &rec.values[w..]);
            layer.trainable = c.trainable;
            Ok(Layer::Conv1d(layer))
        }
        (Layer::Relu, TAG_RELU) => Ok(Layer::Relu),
        (Layer::BatchNorm(b), TAG_BATCHNORM) => {
            let n = b.channels();
            shape_is(&[n])?;
            want(4 * n + 2)?;
            let v = &rec.values;
            let mut layer = BatchNorm::new(n);
            layer.gamma = param(n, 1, &v[..n]);
            layer.beta = param(n, 1, &v[n..2 * n]);
            layer.running_mean = v[2 * n..3 * n].to_vec();
            layer.running_var = v[3 * n..4 * n].to_vec();
            layer.momentum = v[4 * n];
            layer.epsilon = v[4 * n + 1];
            Ok(Layer::BatchNorm(layer))
        }
        (Layer::MaxPool(p), TAG_POOL) => {
            shape_is(&[p.pool_len, p.stride])?;
            Ok(Layer::MaxPool(MaxPool1d::new(p.pool_len, p.stride)?))
        }
        (Layer::Flatten, TAG_FLATTEN) => Ok(Layer::Flatten),
        (Layer::Dense(d), TAG_DENSE) => {
            shape_is(&[d.in_dim(), d.out_dim()])?;
            let w = d.in_dim() * d.out_dim();
            want(w + d.out_dim())?;
            let mut layer = Dense::new(d.in_dim(), d.out_dim());
            layer.weight = param(d.out_dim(), d.in_dim(), &rec.values[..w]);
            layer.bias = param(1, d.out_dim(), &rec.values[w..]);
            Ok(Layer::Dense(layer))
        }
        (Layer::Dropout(_), TAG_DROPOUT) => {
            want(1)?;
            Ok(Layer::Dropout(Dropout::new(rec.values[0])?))
        }
        (Layer::Softmax, TAG_SOFTMAX) => Ok(Layer::Softmax),
        (expected, tag) => Err(mismatch(
            config,
            format!("layer tag {tag} where a {} layer belongs", expected.kind_name()),
        )),
    }
}

/// Parses checkpoint bytes back into a model.
pub fn load_checkpoint(bytes: &[u8]) -> Result<Model> {
    if bytes.len() < 4 || &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic);
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = r.u16()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    if bytes.len() < 10 {
        return Err(Error::Truncated);
    }
    let (body, crc_bytes) = bytes.split_at(bytes.len() - 4);
    let stored_crc = u32::from_le_bytes(crc_bytes.try_into().expect("4 bytes"));
    let mut r = Reader { bytes: body, pos: 6 };
    let id_len = r.u16()? as usize;
    let id = String::from_utf8(r.take(id_len)?.to_vec())
        .map_err(|_| Error::ConfigMismatch { config: "?".into(), detail: "config id is not UTF-8".into() })?;
    let n_layers = r.u32()? as usize;
    let mut records = Vec::new();
    for _ in 0..n_layers {
        let tag = r.u8()?;
        let n_shape = r.u8()? as usize;
        let shape = (0..n_shape).map(|_| r.u32().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
        let n_values = r.u32()? as usize;
        let values = r.f64s(n_values)?;
        records.push(Record { tag, shape, values });
    }
    if r.pos != body.len() {
        return Err(Error::Checksum);
    }
    if crc32fast::hash(body) != stored_crc {
        return Err(Error::Checksum);
    }

    let config = ModelConfig::from_id(&id).map_err(|e| Error::ConfigMismatch {
        config: id.clone(),
        detail: e.to_string(),
    })?;
    let template = Model::from_config(config.clone(), 0)?;
    if template.layers().len() != records.len() {
        return Err(mismatch(
            &config,
            format!("{} layers stored, {} expected", records.len(), template.layers().len()),
        ));
    }
    let layers = template
        .layers()
        .iter()
        .zip(&records)
        .map(|(expected, rec)| restore_layer(&config, expected, rec))
        .collect::<Result<Vec<_>>>()?;
    Ok(Model::from_parts(config, layers))
}

/// Writes a checkpoint atomically (temporary file, then rename).
pub fn write_checkpoint(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &save_checkpoint(model))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Model> {
    load_checkpoint(&std::fs::read(path)?)
}
