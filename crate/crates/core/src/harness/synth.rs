//! Seed-deterministic synthetic stand-in for the ten-class dataset.
//!
//! Each class lives in its own frequency band and has its own temporal
//! texture (steady tone clusters, amplitude-modulated noise, chirps, tone-burst
//! trains), so the classes are separable from the waveform alone.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::manifest::{DatasetManifest, ManifestEntry, CLASS_NAMES, N_FOLDS};
use crate::audio::{encode_wav_pcm16, Waveform};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

pub const SYNTH_SAMPLE_RATE: u32 = 16_000;
const MIN_SECONDS: f64 = 1.0;
const MAX_SECONDS: f64 = 4.0;
const NOISE_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    ToneCluster,
    ModulatedNoise,
    Chirp,
    BurstTrain,
}

/// Generative family and band of each synthetic class.
pub const CLASS_BANDS: [(Family, f64, f64); 10] = [
    (Family::ToneCluster, 200.0, 400.0),
    (Family::ModulatedNoise, 600.0, 900.0),
    (Family::Chirp, 1_100.0, 1_500.0),
    (Family::BurstTrain, 1_800.0, 2_200.0),
    (Family::ToneCluster, 2_600.0, 3_000.0),
    (Family::ModulatedNoise, 3_400.0, 3_800.0),
    (Family::Chirp, 4_200.0, 4_800.0),
    (Family::BurstTrain, 5_400.0, 5_800.0),
    (Family::ToneCluster, 6_400.0, 6_800.0),
    (Family::ModulatedNoise, 7_100.0, 7_600.0),
];

fn clip_rng(seed: u64, class_id: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((class_id as u64) << 32 | index as u64);
    rng
}

/// Synthesizes one clip of class `class_id`.
pub fn synth_clip(class_id: usize, rng: &mut impl Rng) -> Result<Waveform> {
    let &(family, lo, hi) = CLASS_BANDS
        .get(class_id)
        .ok_or_else(|| Error::InvalidArgument(format!("class {class_id} out of range")))?;
    let sr = SYNTH_SAMPLE_RATE as f64;
    let len = rng.gen_range((MIN_SECONDS * sr) as usize..=(MAX_SECONDS * sr) as usize);
    let amp = rng.gen_range(0.3..0.6);
    let mut x = vec![0.0; len];

    match family {
        Family::ToneCluster => {
            let partials: Vec<(f64, f64)> = (0..3)
                .map(|_| (rng.gen_range(lo..hi), rng.gen_range(0.0..2.0 * PI)))
                .collect();
            for (n, v) in x.iter_mut().enumerate() {
                let t = n as f64 / sr;
                *v = partials.iter().map(|(f, ph)| (2.0 * PI * f * t + ph).sin()).sum::<f64>() / 3.0;
            }
        }
        Family::ModulatedNoise => {
            // Band-limited noise as a sum of random-phase sinusoids inside the band.
            let comps: Vec<(f64, f64)> = (0..32)
                .map(|_| (rng.gen_range(lo..hi), rng.gen_range(0.0..2.0 * PI)))
                .collect();
            let rate = rng.gen_range(2.0..6.0);
            for (n, v) in x.iter_mut().enumerate() {
                let t = n as f64 / sr;
                let carrier: f64 = comps.iter().map(|(f, ph)| (2.0 * PI * f * t + ph).sin()).sum::<f64>() / 32f64.sqrt();
                *v = carrier * 0.5 * (1.0 + (2.0 * PI * rate * t).sin()) * 0.5;
            }
        }
        Family::Chirp => {
            // Repeated linear sweeps from lo to hi.
            let period = rng.gen_range(0.2..0.5);
            let mut phase = rng.gen_range(0.0..2.0 * PI);
            for (n, v) in x.iter_mut().enumerate() {
                let t = n as f64 / sr;
                let frac = (t / period).fract();
                let f = lo + (hi - lo) * frac;
                phase += 2.0 * PI * f / sr;
                *v = phase.sin();
            }
        }
        Family::BurstTrain => {
            let f = rng.gen_range(lo..hi);
            let rate = rng.gen_range(8.0..12.0);
            let burst = 0.02;
            for (n, v) in x.iter_mut().enumerate() {
                let t = n as f64 / sr;
                let local = (t * rate).fract() / rate;
                if local < burst {
                    let env = (PI * local / burst).sin();
                    *v = env * (2.0 * PI * f * t).sin();
                }
            }
        }
    }

    for v in x.iter_mut() {
        *v = (*v * amp + NOISE_FLOOR * rng.gen_range(-1.0..1.0)).clamp(-1.0, 1.0);
    }
    Waveform::new(x, SYNTH_SAMPLE_RATE)
}

/// Writes `10 * n_per_class` clips under `out_dir/audio/fold<k>/` and the
/// metadata CSV under `out_dir/metadata/UrbanSound8K.csv`. Clip `i` of each
/// class goes to fold `i % 10 + 1`.
pub fn gen_synthetic(n_per_class: usize, seed: u64, out_dir: &Path) -> Result<DatasetManifest> {
    if n_per_class < 2 {
        return Err(Error::InvalidArgument("n_per_class must be at least 2".into()));
    }
    let audio_root = out_dir.join("audio");
    for fold in 1..=N_FOLDS {
        std::fs::create_dir_all(audio_root.join(format!("fold{fold}")))?;
    }
    std::fs::create_dir_all(out_dir.join("metadata"))?;

    let mut entries = Vec::with_capacity(n_per_class * CLASS_NAMES.len());
    for (class_id, name) in CLASS_NAMES.iter().enumerate() {
        for i in 0..n_per_class {
            let fold = (i % N_FOLDS as usize) as u8 + 1;
            let clip = synth_clip(class_id, &mut clip_rng(seed, class_id, i))?;
            let path = audio_root
                .join(format!("fold{fold}"))
                .join(format!("synth-{class_id}-{i:04}.wav"));
            write_atomic(&path, &encode_wav_pcm16(&clip))?;
            entries.push(ManifestEntry {
                file_path: path,
                fold,
                class_id,
                class_name: name.to_string(),
            });
        }
    }
    let manifest = DatasetManifest::new(entries)?;
    write_atomic(
        &out_dir.join("metadata").join("UrbanSound8K.csv"),
        &manifest.to_metadata_csv(&audio_root)?,
    )?;
    Ok(manifest)
}
