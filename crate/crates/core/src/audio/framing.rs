use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Waveform;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowKind {
    Rectangular,
    Hamming,
}

impl FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rect" | "rectangular" => Ok(WindowKind::Rectangular),
            "hamming" => Ok(WindowKind::Hamming),
            other => Err(Error::InvalidArgument(format!(
                "unknown window {other:?} (valid: rect, hamming)"
            ))),
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowKind::Rectangular => "rect",
            WindowKind::Hamming => "hamming",
        })
    }
}

/// How a clip is cut into network inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FramingPolicy {
    frame_len: usize,
    overlap_fraction: f64,
    window: WindowKind,
    pad_short: bool,
}

impl FramingPolicy {
    pub fn new(frame_len: usize, overlap_fraction: f64, window: WindowKind, pad_short: bool) -> Result<Self> {
        if frame_len == 0 {
            return Err(Error::InvalidArgument("frame length must be positive".into()));
        }
        if !(0.0..1.0).contains(&overlap_fraction) {
            return Err(Error::InvalidArgument(format!(
                "overlap fraction {overlap_fraction} outside [0, 1)"
            )));
        }
        let p = Self {
            frame_len,
            overlap_fraction,
            window,
            pad_short,
        };
        if p.hop() == 0 {
            return Err(Error::InvalidArgument(format!(
                "overlap {overlap_fraction} leaves a zero hop for frame length {frame_len}"
            )));
        }
        Ok(p)
    }

    /// Policy from an overlap percentage as accepted on the command line (0, 25, 50, 75).
    pub fn from_percent(frame_len: usize, overlap_percent: u32, window: WindowKind, pad_short: bool) -> Result<Self> {
        if ![0, 25, 50, 75].contains(&overlap_percent) {
            return Err(Error::InvalidArgument(format!(
                "overlap {overlap_percent}% not one of 0, 25, 50, 75"
            )));
        }
        Self::new(frame_len, overlap_percent as f64 / 100.0, window, pad_short)
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn overlap_fraction(&self) -> f64 {
        self.overlap_fraction
    }

    pub fn window(&self) -> WindowKind {
        self.window
    }

    pub fn pad_short(&self) -> bool {
        self.pad_short
    }

    pub fn hop(&self) -> usize {
        (self.frame_len as f64 * (1.0 - self.overlap_fraction)).round() as usize
    }
}

/// One windowed slice of a clip.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub values: Vec<f64>,
    pub source_offset: usize,
}

pub fn window_values(kind: WindowKind, len: usize) -> Vec<f64> {
    match kind {
        WindowKind::Rectangular => vec![1.0; len],
        WindowKind::Hamming if len == 1 => vec![1.0],
        WindowKind::Hamming => {
            let denom = (len - 1) as f64;
            (0..len)
                .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / denom).cos())
                .collect()
        }
    }
}

/// Number of frames a clip of `len` samples yields under `p`.
pub fn frame_count(len: usize, p: &FramingPolicy) -> usize {
    if len < p.frame_len {
        usize::from(p.pad_short && len > 0)
    } else {
        (len - p.frame_len) / p.hop() + 1
    }
}

/// Precomputed window for cutting frames one at a time.
#[derive(Debug, Clone)]
pub struct Framer {
    policy: FramingPolicy,
    window: Vec<f64>,
}

impl Framer {
    pub fn new(policy: FramingPolicy) -> Self {
        Self {
            window: window_values(policy.window, policy.frame_len),
            policy,
        }
    }

    pub fn policy(&self) -> &FramingPolicy {
        &self.policy
    }

    /// Frames available from a clip of `len` samples; errors when the clip is
    /// shorter than one frame and padding is disabled.
    pub fn count(&self, len: usize) -> Result<usize> {
        if len < self.policy.frame_len && !self.policy.pad_short {
            return Err(Error::ClipTooShort {
                len,
                frame_len: self.policy.frame_len,
            });
        }
        Ok(frame_count(len, &self.policy))
    }

    /// The `index`-th frame of `samples`. Short clips are zero-padded at the
    /// tail before windowing.
    pub fn frame(&self, samples: &[f64], index: usize) -> Frame {
        let offset = index * self.policy.hop();
        let end = (offset + self.policy.frame_len).min(samples.len());
        let mut values = vec![0.0; self.policy.frame_len];
        for ((v, s), g) in values.iter_mut().zip(&samples[offset.min(end)..end]).zip(&self.window) {
            *v = s * g;
        }
        Frame {
            values,
            source_offset: offset,
        }
    }
}

/// Slides a window over the clip. Trailing remainders shorter than a hop are
/// dropped; clips shorter than one frame are zero-padded at the tail when the
/// policy allows it.
pub fn frame_signal(w: &Waveform, p: &FramingPolicy) -> Result<Vec<Frame>> {
    let framer = Framer::new(*p);
    let n = framer.count(w.len())?;
    Ok((0..n).map(|i| framer.frame(w.samples(), i)).collect())
}
