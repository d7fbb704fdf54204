//! Inspection of learned first-stage filters: kernel spectra, sinusoid
//! probing, and ordering channels by their central frequency.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gammatone::{argmax, bin_frequency, fft_magnitude, padded_len};
use crate::harness::TARGET_SAMPLE_RATE;
use crate::model::Model;
use crate::nn::Layer;

/// Per-kernel magnitude spectra of one conv layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpectra {
    pub layer_index: usize,
    /// Sample rate seen by the layer's input after cumulative striding.
    pub sample_rate_hz: f64,
    pub freqs_hz: Vec<f64>,
    /// One row per output channel.
    pub magnitudes: Vec<Vec<f64>>,
}

impl KernelSpectra {
    /// Frequency of the highest bin of each channel.
    pub fn peak_freqs_hz(&self) -> Vec<f64> {
        self.magnitudes.iter().map(|m| self.freqs_hz[argmax(m)]).collect()
    }

    /// Header `channel,<freq>...`, one row per channel.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["channel".to_string()];
        header.extend(self.freqs_hz.iter().map(|f| format!("{f}")));
        w.write_record(&header)?;
        for (c, row) in self.magnitudes.iter().enumerate() {
            let mut rec = vec![c.to_string()];
            rec.extend(row.iter().map(|v| format!("{v}")));
            w.write_record(&rec)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// Sample rate at the input of `layers[layer_index]`.
pub fn layer_sample_rate(model: &Model, layer_index: usize) -> f64 {
    let decimation: usize = model.layers()[..layer_index.min(model.layers().len())]
        .iter()
        .map(|l| match l {
            Layer::Conv1d(c) => c.stride(),
            Layer::MaxPool(p) => p.stride,
            _ => 1,
        })
        .product();
    TARGET_SAMPLE_RATE as f64 / decimation as f64
}

/// FFT magnitude of every flattened kernel in `layers[layer_index]`.
pub fn kernel_spectra(model: &Model, layer_index: usize) -> Result<KernelSpectra> {
    let conv = match model.layers().get(layer_index) {
        Some(Layer::Conv1d(c)) => c,
        Some(other) => {
            return Err(Error::InvalidArgument(format!(
                "layer {layer_index} is {}, not a convolution",
                other.kind_name()
            )))
        }
        None => {
            return Err(Error::InvalidArgument(format!(
                "layer {layer_index} out of range (model has {} layers)",
                model.layers().len()
            )))
        }
    };
    let sample_rate_hz = layer_sample_rate(model, layer_index);
    let n = padded_len(conv.in_channels() * conv.kernel_len());
    let magnitudes: Vec<Vec<f64>> = conv
        .weight
        .data
        .outer_iter()
        .map(|row| fft_magnitude(&row.to_vec()))
        .collect();
    let freqs_hz = (0..n / 2 + 1).map(|b| bin_frequency(b, n, sample_rate_hz)).collect();
    Ok(KernelSpectra {
        layer_index,
        sample_rate_hz,
        freqs_hz,
        magnitudes,
    })
}

/// How each channel's feature map is summarized over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ProbeActivation {
    /// Mean of the post-ReLU map.
    #[default]
    Relu,
    /// Mean absolute value of the pre-activation map.
    AbsPreActivation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub amplitude: f64,
    pub phase_rad: f64,
    pub activation: ProbeActivation,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            phase_rad: 0.0,
            activation: ProbeActivation::Relu,
        }
    }
}

/// Mean first-layer activation per (probe frequency, channel).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseMatrix {
    pub freqs_hz: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl ResponseMatrix {
    pub fn n_channels(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Strongest channel for each probe.
    pub fn argmax_channels(&self) -> Vec<usize> {
        self.values.iter().map(|r| argmax(r)).collect()
    }

    /// Each row divided by its maximum; all-zero rows stay zero.
    pub fn row_normalized(&self) -> Self {
        let values = self
            .values
            .iter()
            .map(|row| {
                let m = row.iter().cloned().fold(0.0, f64::max);
                if m > 0.0 {
                    row.iter().map(|v| v / m).collect()
                } else {
                    row.clone()
                }
            })
            .collect();
        Self {
            freqs_hz: self.freqs_hz.clone(),
            values,
        }
    }

    /// Reorders columns: column `j` of the result is column `perm[j]`.
    pub fn permute_channels(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n_channels()];
        if perm.len() != seen.len() || !perm.iter().all(|&p| p < seen.len() && !std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!(
                "not a permutation of {} channels",
                self.n_channels()
            )));
        }
        let values = self.values.iter().map(|r| perm.iter().map(|&p| r[p]).collect()).collect();
        Ok(Self {
            freqs_hz: self.freqs_hz.clone(),
            values,
        })
    }

    /// Header `freq_hz,ch0,...`, one row per probe.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["freq_hz".to_string()];
        header.extend((0..self.n_channels()).map(|c| format!("ch{c}")));
        w.write_record(&header)?;
        for (f, row) in self.freqs_hz.iter().zip(&self.values) {
            let mut rec = vec![format!("{f}")];
            rec.extend(row.iter().map(|v| format!("{v}")));
            w.write_record(&rec)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// `f_lo, f_lo + step, ...` up to and including `f_hi`.
pub fn probe_frequencies(f_lo: f64, f_hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(f_lo > 0.0 && f_hi >= f_lo && step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "probe sweep needs 0 < f_lo <= f_hi and step > 0 (got {f_lo}, {f_hi}, {step})"
        )));
    }
    let n = ((f_hi - f_lo) / step).floor() as usize + 1;
    Ok((0..n).map(|i| f_lo + i as f64 * step).collect())
}

/// Feeds sinusoids of the model's input length through the first conv
/// layer and averages each channel over time.
pub fn probe_response(model: &Model, freqs_hz: &[f64], opts: ProbeOptions) -> Result<ResponseMatrix> {
    let nyquist = TARGET_SAMPLE_RATE as f64 / 2.0;
    if let Some(f) = freqs_hz.iter().find(|&&f| !(f >= 0.0 && f < nyquist)) {
        return Err(Error::InvalidArgument(format!("probe {f} Hz is not below Nyquist ({nyquist} Hz)")));
    }
    if freqs_hz.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("probe frequencies must be strictly increasing".into()));
    }
    if !matches!(model.layers().first(), Some(Layer::Conv1d(_))) {
        return Err(Error::InvalidArgument("model does not start with a convolution".into()));
    }
    let n = model.input_len();
    let sr = TARGET_SAMPLE_RATE as f64;
    let values = freqs_hz
        .par_iter()
        .map(|&f| {
            let signal: Vec<f64> = (0..n)
                .map(|t| opts.amplitude * (2.0 * std::f64::consts::PI * f * t as f64 / sr + opts.phase_rad).sin())
                .collect();
            let (depth, abs) = match opts.activation {
                ProbeActivation::Relu => (2, false),
                ProbeActivation::AbsPreActivation => (1, true),
            };
            let map = model.forward_prefix(&signal, depth)?;
            Ok(map
                .data
                .outer_iter()
                .map(|row| {
                    let s: f64 = if abs { row.iter().map(|v| v.abs()).sum() } else { row.sum() };
                    s / row.len() as f64
                })
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(ResponseMatrix {
        freqs_hz: freqs_hz.to_vec(),
        values,
    })
}

/// Stable permutation ordering kernels by FFT-peak bin, ascending.
pub fn sort_by_central_frequency(kernels: &[Vec<f64>]) -> Vec<usize> {
    let peaks: Vec<usize> = kernels.iter().map(|k| argmax(&fft_magnitude(k))).collect();
    let mut perm: Vec<usize> = (0..kernels.len()).collect();
    perm.sort_by_key(|&i| peaks[i]);
    perm
}

/// Flattened kernels of `layers[layer_index]`, one per output channel.
pub fn conv_kernels(model: &Model, layer_index: usize) -> Result<Vec<Vec<f64>>> {
    match model.layers().get(layer_index) {
        Some(Layer::Conv1d(c)) => Ok(c.weight.data.outer_iter().map(|r| r.to_vec()).collect()),
        _ => Err(Error::InvalidArgument(format!("layer {layer_index} is not a convolution"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_row_count() {
        assert_eq!(probe_frequencies(1.0, 8000.0, 100.0).unwrap().len(), 80);
        assert!(probe_frequencies(0.0, 10.0, 1.0).is_err());
    }

    #[test]
    fn sort_is_stable() {
        let tone = |f: f64| (0..64).map(|n| (2.0 * std::f64::consts::PI * f * n as f64 / 64.0).cos()).collect::<Vec<_>>();
        assert_eq!(sort_by_central_frequency(&[tone(12.0), tone(4.0)]), vec![1, 0]);
        assert_eq!(sort_by_central_frequency(&[tone(4.0), tone(4.0), tone(2.0)]), vec![2, 0, 1]);
    }

    #[test]
    fn permutation_checks() {
        let m = ResponseMatrix {
            freqs_hz: vec![1.0],
            values: vec![vec![1.0, 2.0, 4.0]],
        };
        assert_eq!(m.permute_channels(&[2, 0, 1]).unwrap().values[0], vec![4.0, 1.0, 2.0]);
        assert!(m.permute_channels(&[0, 0, 1]).is_err());
        assert_eq!(m.row_normalized().values[0], vec![0.25, 0.5, 1.0]);
    }
}
