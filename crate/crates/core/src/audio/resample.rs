use std::f64::consts::PI;

use super::Waveform;
use crate::error::{Error, Result};

/// Zero crossings of the sinc kernel on each side of the output instant.
const SINC_ZEROS: f64 = 16.0;
const KAISER_BETA: f64 = 8.6;

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let half_sq = (x / 2.0) * (x / 2.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= half_sq / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn kaiser(u: f64, norm: f64) -> f64 {
    // u in [-1, 1]
    let r = (1.0 - u * u).max(0.0).sqrt();
    bessel_i0(KAISER_BETA * r) / norm
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Kaiser-windowed sinc resampling with the cutoff at the lower of the two
/// Nyquist rates. Output length is `round(len * target / source)`.
pub fn resample(w: &Waveform, target_hz: u32) -> Result<Waveform> {
    if target_hz == 0 {
        return Err(Error::InvalidArgument("target sample rate must be positive".into()));
    }
    let src_hz = w.sample_rate_hz();
    if src_hz == target_hz {
        return Ok(w.clone());
    }
    let input = w.samples();
    let n_in = input.len();
    let n_out = ((n_in as u64 * target_hz as u64 + src_hz as u64 / 2) / src_hz as u64) as usize;
    let n_out = n_out.max(1);

    let step = src_hz as f64 / target_hz as f64;
    let cutoff = (target_hz as f64 / src_hz as f64).min(1.0);
    let half_width = SINC_ZEROS / cutoff;
    let norm = bessel_i0(KAISER_BETA);

    let out = (0..n_out)
        .map(|n| {
            let center = n as f64 * step;
            let lo = (center - half_width).ceil().max(0.0) as usize;
            let hi = ((center + half_width).floor() as usize).min(n_in - 1);
            let mut acc = 0.0;
            for (i, &x) in input.iter().enumerate().take(hi + 1).skip(lo) {
                let d = center - i as f64;
                acc += x * cutoff * sinc(cutoff * d) * kaiser(d / half_width, norm);
            }
            acc.clamp(-1.0, 1.0)
        })
        .collect();
    Waveform::new(out, target_hz)
}
