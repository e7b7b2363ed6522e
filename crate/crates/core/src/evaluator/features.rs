//! Per-channel log band-power features.
//!
//! For band `[low, high)` the feature is `ln(ε + Σ |X(f)|² / T)` over the
//! one-sided DFT bins whose frequency falls in the band. The broadband variant
//! is `ln(ε + sample variance)`, one value per channel.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::model::TrialSet;

pub const LOG_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMode {
    Bands(Vec<(f64, f64)>),
    Broadband,
}

impl FeatureMode {
    pub fn per_channel(&self) -> usize {
        match self {
            FeatureMode::Bands(b) => b.len(),
            FeatureMode::Broadband => 1,
        }
    }
}

/// Row-major feature matrix, one row per trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl Features {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n_rows * n_cols, "feature matrix shape");
        Features {
            n_rows,
            n_cols,
            data,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    /// Keeps the column blocks of the given channels, in the order given.
    pub fn select_channels(&self, channels: &[usize], per_channel: usize) -> Features {
        let n_cols = channels.len() * per_channel;
        let mut data = Vec::with_capacity(self.n_rows * n_cols);
        for i in 0..self.n_rows {
            let row = self.row(i);
            for &c in channels {
                data.extend_from_slice(&row[c * per_channel..(c + 1) * per_channel]);
            }
        }
        Features::new(self.n_rows, n_cols, data)
    }
}

struct BandPower {
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl BandPower {
    fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(n);
        let scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        BandPower {
            fft,
            buf: vec![Complex::default(); n],
            scratch,
        }
    }

    fn push_features(&mut self, series: &[f32], fs_hz: f64, bands: &[(f64, f64)], out: &mut Vec<f64>) {
        let n = series.len();
        for (b, &v) in self.buf.iter_mut().zip(series) {
            *b = Complex::new(v as f64, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        let bin_hz = fs_hz / n as f64;
        for &(low, high) in bands {
            let power: f64 = (0..=n / 2)
                .filter(|&k| {
                    let f = k as f64 * bin_hz;
                    f >= low && f < high
                })
                .map(|k| self.buf[k].norm_sqr())
                .sum();
            out.push((LOG_EPSILON + power / n as f64).ln());
        }
    }
}

fn log_variance(series: &[f32]) -> f64 {
    let n = series.len();
    if n < 2 {
        return LOG_EPSILON.ln();
    }
    let mean = series.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let ss: f64 = series.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
    (LOG_EPSILON + ss / (n - 1) as f64).ln()
}

/// Features for every channel of `trials`; columns are channel-major, then band.
pub fn extract_with(trials: &TrialSet, mode: &FeatureMode) -> Features {
    let per = mode.per_channel();
    let n_cols = trials.n_channels() * per;
    let mut data = Vec::with_capacity(trials.n_trials() * n_cols);
    let fs = trials.montage().fs_hz();
    let mut bp = match mode {
        FeatureMode::Bands(_) => Some(BandPower::new(trials.n_samples())),
        FeatureMode::Broadband => None,
    };
    for trial in 0..trials.n_trials() {
        for ch in 0..trials.n_channels() {
            let series = trials.channel(trial, ch);
            match (mode, bp.as_mut()) {
                (FeatureMode::Bands(bands), Some(bp)) => bp.push_features(series, fs, bands, &mut data),
                _ => data.push(log_variance(series)),
            }
        }
    }
    Features::new(trials.n_trials(), n_cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Montage;

    fn one_channel(values: Vec<f32>, fs: f64) -> TrialSet {
        let n = values.len();
        TrialSet::new(Montage::numbered(1, fs).unwrap(), n, vec![1], values).unwrap()
    }

    const BANDS: [(f64, f64); 3] = [(4.0, 8.0), (8.0, 13.0), (13.0, 30.0)];

    #[test]
    fn silent_channel_broadband_is_log_eps() {
        let f = extract_with(&one_channel(vec![0.0; 32], 100.0), &FeatureMode::Broadband);
        assert_eq!(f.row(0), &[LOG_EPSILON.ln()]);
    }

    #[test]
    fn doubling_adds_log_four() {
        let x: Vec<f32> = (0..64).map(|i| ((i * 37 % 11) as f32) - 5.0).collect();
        let x2: Vec<f32> = x.iter().map(|v| v * 2.0).collect();
        let a = extract_with(&one_channel(x, 100.0), &FeatureMode::Broadband).row(0)[0];
        let b = extract_with(&one_channel(x2, 100.0), &FeatureMode::Broadband).row(0)[0];
        assert!((b - a - 4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn alpha_sinusoid_lands_in_alpha_band() {
        // 10 Hz at 250 Hz over 250 samples: all energy in bin 10
        let x: Vec<f32> = (0..250)
            .map(|t| (2.0 * std::f64::consts::PI * 10.0 * t as f64 / 250.0).sin() as f32)
            .collect();
        let f = extract_with(&one_channel(x.clone(), 250.0), &FeatureMode::Bands(BANDS.to_vec()));
        let r = f.row(0);
        assert!(r[1] > r[0] && r[1] > r[2]);
        // direct DFT oracle for bin 10: |X|^2 = (T/2)^2, band power = T/4
        let (re, im) = x.iter().enumerate().fold((0.0, 0.0), |(re, im), (t, &v)| {
            let w = -2.0 * std::f64::consts::PI * 10.0 * t as f64 / 250.0;
            (re + v as f64 * w.cos(), im + v as f64 * w.sin())
        });
        let expected = (LOG_EPSILON + (re * re + im * im) / 250.0).ln();
        assert!((r[1] - expected).abs() < 1e-6);
        assert!(((re * re + im * im) / 250.0 - 62.5).abs() < 1e-3);
    }

    #[test]
    fn dc_shift_leaves_bands_unchanged() {
        let x: Vec<f32> = (0..200).map(|i| ((i * 7919 % 97) as f32) / 50.0 - 1.0).collect();
        let shifted: Vec<f32> = x.iter().map(|v| v + 3.0).collect();
        let mode = FeatureMode::Bands(BANDS.to_vec());
        let a = extract_with(&one_channel(x, 250.0), &mode);
        let b = extract_with(&one_channel(shifted, 250.0), &mode);
        for (u, v) in a.row(0).iter().zip(b.row(0)) {
            assert!(((u - v) / u).abs() < 1e-6, "{u} vs {v}");
        }
    }

    #[test]
    fn select_channels_picks_blocks() {
        let f = Features::new(1, 6, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(f.select_channels(&[2, 0], 2).row(0), &[4.0, 5.0, 0.0, 1.0]);
    }
}
