use std::f64::consts::PI;

use esc1d::audio::{resample, Waveform};
use esc1d::gammatone::{
    argmax, bin_frequency, erb_bandwidth, fft_magnitude, make_bank, padded_len, GammatoneBank,
};
use proptest::prelude::*;

/// Direct O(N²) DFT magnitudes of `x` zero-padded to `n`.
fn naive_dft(x: &[f64], n: usize) -> Vec<f64> {
    (0..n / 2 + 1)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let a = -2.0 * PI * k as f64 * t as f64 / n as f64;
                re += v * a.cos();
                im += v * a.sin();
            }
            (re * re + im * im).sqrt()
        })
        .collect()
}

proptest! {
    #[test]
    fn fft_matches_naive_dft(x in prop::collection::vec(-1.0f64..1.0, 1..200)) {
        let got = fft_magnitude(&x);
        let want = naive_dft(&x, padded_len(x.len()));
        prop_assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-9 * (1.0 + w.abs()));
        }
    }

    #[test]
    fn parseval_holds(x in prop::collection::vec(-1.0f64..1.0, 1..300)) {
        let n = padded_len(x.len());
        let mag = fft_magnitude(&x);
        // Reconstruct the full spectrum energy from the one-sided magnitudes.
        let mut spectral = mag[0] * mag[0];
        if n > 1 {
            spectral += mag[n / 2] * mag[n / 2];
            spectral += 2.0 * mag[1..n / 2].iter().map(|m| m * m).sum::<f64>();
        }
        let temporal: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!((spectral / n as f64 - temporal).abs() < 1e-9 * (1.0 + temporal));
    }

    #[test]
    fn cosine_peaks_at_its_bin(log_n in 3u32..10, frac in 0.0f64..1.0) {
        let n = 1usize << log_n;
        let k = 1 + (frac * (n / 2 - 2) as f64) as usize;
        let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * k as f64 * t as f64 / n as f64).cos()).collect();
        prop_assert_eq!(argmax(&fft_magnitude(&x)), k);
        prop_assert_eq!(argmax(&naive_dft(&x, n)), k);
    }
}

#[test]
fn small_spectra() {
    let mut imp = vec![0.0; 8];
    imp[0] = 1.0;
    assert!(fft_magnitude(&imp).iter().all(|m| (m - 1.0).abs() < 1e-12));
    let dc = fft_magnitude(&[1.0; 4]);
    assert!((dc[0] - 4.0).abs() < 1e-12);
    assert!(dc[1].abs() < 1e-12 && dc[2].abs() < 1e-12);
}

#[test]
fn erb_oracle() {
    assert!((erb_bandwidth(0.0) - 24.7).abs() < 1e-12);
    assert!((erb_bandwidth(1000.0) - 24.7 * (4.37 + 1.0)).abs() < 1e-9);
    assert!((erb_bandwidth(8000.0) - 24.7 * (4.37 * 8.0 + 1.0)).abs() < 1e-9);
}

#[test]
fn standard_bank_structure() {
    let bank = GammatoneBank::standard();
    assert_eq!(bank.len(), 64);
    assert_eq!(bank.center_freqs_hz()[0], 100.0);
    assert_eq!(bank.center_freqs_hz()[63], 8000.0);
    assert!(bank.center_freqs_hz().windows(2).all(|w| w[1] > w[0]));
    let n = padded_len(512);
    let bin_hz = bin_frequency(1, n, 16_000.0);
    for (k, kernel) in bank.kernels().iter().enumerate() {
        assert_eq!(kernel.len(), 512);
        assert!(kernel.iter().all(|v| v.is_finite()));
        let mag = fft_magnitude(kernel);
        let peak = mag.iter().cloned().fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-9, "kernel {k} peak {peak}");
        let peak_hz = bin_frequency(argmax(&mag), n, 16_000.0);
        let fc = bank.center_freqs_hz()[k];
        // Near Nyquist the spectral image overlaps the passband and drags the
        // peak; there the bound is the filter bandwidth.
        let bandwidth = 1.019 * erb_bandwidth(fc);
        let tol = if fc + bandwidth < 8_000.0 { bin_hz } else { bandwidth };
        assert!(
            (peak_hz - fc).abs() <= tol,
            "kernel {k}: peak {peak_hz} Hz vs center {}",
            bank.center_freqs_hz()[k]
        );
    }
}

#[test]
fn single_filter_banks_peak_at_their_frequency() {
    for f in [250.0, 1000.0, 3333.0, 6000.0] {
        let bank = make_bank(1, f, f + 1e-6, 1024, 16_000).unwrap();
        let mag = fft_magnitude(&bank.kernels()[0]);
        let n = padded_len(1024);
        let peak = bin_frequency(argmax(&mag), n, 16_000.0);
        assert!((peak - f).abs() <= bin_frequency(1, n, 16_000.0), "{f}: {peak}");
    }
    assert!(make_bank(4, 100.0, 9000.0, 512, 16_000).is_err());
    assert!(make_bank(0, 100.0, 1000.0, 512, 16_000).is_err());
}

#[test]
fn resampled_sine_keeps_its_frequency() {
    let src = 44_100u32;
    let x: Vec<f64> = (0..src as usize).map(|t| (2.0 * PI * 1000.0 * t as f64 / src as f64).sin()).collect();
    let w = resample(&Waveform::new(x, src).unwrap(), 16_000).unwrap();
    assert_eq!(w.len(), 16_000);
    let n = padded_len(w.len());
    let mag = fft_magnitude(w.samples());
    let peak = bin_frequency(argmax(&mag), n, 16_000.0);
    assert!((peak - 1000.0).abs() <= bin_frequency(1, n, 16_000.0), "{peak}");
}

#[test]
fn resample_lengths() {
    let w = Waveform::new(vec![0.1; 44_100 * 4], 44_100).unwrap();
    assert_eq!(resample(&w, 16_000).unwrap().len(), 64_000);
    let same = resample(&w, 44_100).unwrap();
    assert_eq!(same, w);
}
