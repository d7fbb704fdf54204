//! Gammatone filterbank synthesis and the FFT helpers shared with filter
//! analysis.
//!
//! Kernels are 4th-order gammatone impulse responses
//! `t^3 * exp(-2π·1.019·ERB(f)·t) * cos(2π·f·t)` with Glasberg–Moore ERB
//! bandwidths, center frequencies spaced uniformly on the ERB-rate scale.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

const ORDER: i32 = 4;
const BANDWIDTH_FACTOR: f64 = 1.019;

/// Equivalent rectangular bandwidth in Hz at `f_hz`.
pub fn erb_bandwidth(f_hz: f64) -> f64 {
    24.7 * (4.37 * f_hz / 1000.0 + 1.0)
}

/// ERB-rate (number of ERBs below `f_hz`).
pub fn erb_rate(f_hz: f64) -> f64 {
    21.4 * (4.37 * f_hz / 1000.0 + 1.0).log10()
}

pub fn erb_rate_to_hz(rate: f64) -> f64 {
    (10f64.powf(rate / 21.4) - 1.0) * 1000.0 / 4.37
}

/// `n` center frequencies uniformly spaced on the ERB-rate scale, endpoints included.
pub fn erb_space(n: usize, f_lo_hz: f64, f_hi_hz: f64) -> Vec<f64> {
    if n == 1 {
        return vec![f_lo_hz];
    }
    let lo = erb_rate(f_lo_hz);
    let hi = erb_rate(f_hi_hz);
    (0..n)
        .map(|k| match k {
            0 => f_lo_hz,
            k if k == n - 1 => f_hi_hz,
            k => erb_rate_to_hz(lo + (hi - lo) * k as f64 / (n - 1) as f64),
        })
        .collect()
}

/// Magnitudes of the non-negative-frequency DFT bins of `x` zero-padded to the
/// next power of two. Output length is `padded_len / 2 + 1`.
pub fn fft_magnitude(x: &[f64]) -> Vec<f64> {
    let n = padded_len(x.len());
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..n / 2 + 1].iter().map(|c| c.norm()).collect()
}

pub fn padded_len(len: usize) -> usize {
    len.max(1).next_power_of_two()
}

/// Center frequency in Hz of FFT bin `bin` for a transform of `padded_len` points.
pub fn bin_frequency(bin: usize, padded_len: usize, sample_rate_hz: f64) -> f64 {
    bin as f64 * sample_rate_hz / padded_len as f64
}

/// Index of the largest value; the first one wins on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct GammatoneBank {
    kernels: Vec<Vec<f64>>,
    center_freqs_hz: Vec<f64>,
    sample_rate_hz: u32,
}

impl GammatoneBank {
    pub fn kernels(&self) -> &[Vec<f64>] {
        &self.kernels
    }

    pub fn center_freqs_hz(&self) -> &[f64] {
        &self.center_freqs_hz
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    /// The bank used to initialize the frozen first layer: 64 filters,
    /// 100 Hz to 8 kHz, 512 taps at 16 kHz.
    pub fn standard() -> Self {
        make_bank(64, 100.0, 8000.0, 512, 16_000).expect("standard bank parameters are valid")
    }
}

pub fn gammatone_kernel(center_hz: f64, kernel_len: usize, sample_rate_hz: u32) -> Vec<f64> {
    let b = 2.0 * PI * BANDWIDTH_FACTOR * erb_bandwidth(center_hz);
    let w = 2.0 * PI * center_hz;
    let mut taps: Vec<f64> = (0..kernel_len)
        .map(|n| {
            let t = n as f64 / sample_rate_hz as f64;
            t.powi(ORDER - 1) * (-b * t).exp() * (w * t).cos()
        })
        .collect();
    let peak = fft_magnitude(&taps).into_iter().fold(0.0, f64::max);
    if peak > 0.0 {
        taps.iter_mut().for_each(|v| *v /= peak);
    }
    taps
}

/// Builds `n_filters` gammatone kernels between `f_lo_hz` and `f_hi_hz`, each
/// scaled so its peak FFT magnitude is one.
pub fn make_bank(
    n_filters: usize,
    f_lo_hz: f64,
    f_hi_hz: f64,
    kernel_len: usize,
    sample_rate_hz: u32,
) -> Result<GammatoneBank> {
    let nyquist = sample_rate_hz as f64 / 2.0;
    if n_filters == 0 {
        return Err(Error::InvalidArgument("filterbank needs at least one filter".into()));
    }
    // f_hi may sit exactly on Nyquist: the standard bank spans 100 Hz..8 kHz at 16 kHz.
    if !(f_lo_hz > 0.0 && f_lo_hz < f_hi_hz && f_hi_hz <= nyquist) {
        return Err(Error::InvalidArgument(format!(
            "frequency range {f_lo_hz}..{f_hi_hz} Hz invalid for sample rate {sample_rate_hz}"
        )));
    }
    if kernel_len < 8 {
        return Err(Error::InvalidArgument("kernel length must be at least 8".into()));
    }
    let center_freqs_hz = erb_space(n_filters, f_lo_hz, f_hi_hz);
    let kernels = center_freqs_hz
        .iter()
        .map(|&f| gammatone_kernel(f, kernel_len, sample_rate_hz))
        .collect();
    Ok(GammatoneBank {
        kernels,
        center_freqs_hz,
        sample_rate_hz,
    })
}
