use std::path::Path;

use super::Waveform;
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, Copy)]
struct FmtChunk {
    format: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

fn read_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Decodes a little-endian RIFF/WAVE byte buffer.
///
/// Supports 8/16/24-bit integer PCM and 32-bit IEEE float, any channel count.
/// Channels are averaged to mono and integer samples scaled into [-1, 1].
pub fn decode_wav(bytes: &[u8]) -> Result<Waveform> {
    if bytes.len() < 12 {
        return Err(Error::MalformedHeader("file shorter than RIFF header".into()));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(Error::MalformedHeader(format!(
            "expected RIFF magic, found {:?}",
            String::from_utf8_lossy(&bytes[0..4])
        )));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(Error::MalformedHeader("missing WAVE form type".into()));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        // Writers sometimes leave a bogus size on the final data chunk.
        let body_end = body_start.saturating_add(size).min(bytes.len());
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(Error::MalformedHeader("fmt chunk too short".into()));
                }
                let mut format = read_u16(body, 0);
                let bits_per_sample = read_u16(body, 14);
                if format == FORMAT_EXTENSIBLE {
                    if body.len() < 26 {
                        return Err(Error::MalformedHeader("extensible fmt chunk too short".into()));
                    }
                    format = read_u16(body, 24);
                }
                fmt = Some(FmtChunk {
                    format,
                    channels: read_u16(body, 2),
                    sample_rate: read_u32(body, 4),
                    bits_per_sample,
                });
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // Chunks are word aligned.
        pos = body_start.saturating_add(size).saturating_add(size & 1);
    }

    let fmt = fmt.ok_or_else(|| Error::MalformedHeader("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| Error::MalformedHeader("missing data chunk".into()))?;
    if fmt.channels == 0 {
        return Err(Error::MalformedHeader("zero channels".into()));
    }
    if fmt.sample_rate == 0 {
        return Err(Error::MalformedHeader("zero sample rate".into()));
    }

    let bytes_per_sample = match (fmt.format, fmt.bits_per_sample) {
        (FORMAT_PCM, 8) => 1,
        (FORMAT_PCM, 16) => 2,
        (FORMAT_PCM, 24) => 3,
        (FORMAT_IEEE_FLOAT, 32) => 4,
        (f, b) => {
            return Err(Error::UnsupportedEncoding(format!(
                "format tag {f} with {b} bits per sample"
            )))
        }
    };
    let channels = fmt.channels as usize;
    let frame_bytes = bytes_per_sample * channels;
    let n_frames = data.len() / frame_bytes;
    if n_frames == 0 {
        return Err(Error::EmptyAudio);
    }

    let decode_one = |chunk: &[u8]| -> f64 {
        match (fmt.format, bytes_per_sample) {
            (FORMAT_PCM, 1) => (chunk[0] as f64 - 128.0) / 128.0,
            (FORMAT_PCM, 2) => i16::from_le_bytes([chunk[0], chunk[1]]) as f64 / 32768.0,
            (FORMAT_PCM, 3) => {
                let v = i32::from_le_bytes([0, chunk[0], chunk[1], chunk[2]]) >> 8;
                v as f64 / 8_388_608.0
            }
            _ => f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]) as f64,
        }
    };

    let samples = data[..n_frames * frame_bytes]
        .chunks_exact(frame_bytes)
        .map(|frame| {
            let sum: f64 = frame.chunks_exact(bytes_per_sample).map(decode_one).sum();
            (sum / channels as f64).clamp(-1.0, 1.0)
        })
        .collect();
    Waveform::new(samples, fmt.sample_rate)
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let bytes = std::fs::read(path)?;
    decode_wav(&bytes)
}

/// Encodes a waveform as a mono 16-bit PCM WAV file.
pub fn encode_wav_pcm16(w: &Waveform) -> Vec<u8> {
    let n = w.len();
    let data_len = (n * 2) as u32;
    let mut out = Vec::with_capacity(44 + n * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&w.sample_rate_hz().to_le_bytes());
    out.extend_from_slice(&(w.sample_rate_hz() * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in w.samples() {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}
