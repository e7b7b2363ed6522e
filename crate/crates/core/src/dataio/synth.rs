//! Seeded synthetic trial sets with planted informative channels.
//!
//! Every sample starts as white Gaussian noise with standard deviation
//! `noise_sigma`. On informative channels the noise of a class-`y` trial is
//! scaled by a class gain whose log-variance shift is
//!
//! ```text
//! separation * sqrt(2 / T) * (y - (K + 1) / 2)
//! ```
//!
//! `sqrt(2 / T)` is the sampling standard deviation of a pure-noise channel's
//! log-variance, so `separation` is the class-mean offset of that statistic in
//! noise-σ units. Power features (band power, log-variance) see the effect;
//! non-informative channels are pure noise. Trial `t` has class `(t mod K) + 1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelSubset, Montage, TrialSet, BCI_IV_2A_CHANNELS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_trials: usize,
    pub n_channels: usize,
    pub n_samples: usize,
    pub n_classes: usize,
    pub informative_channels: ChannelSubset,
    pub separation: f64,
    pub noise_sigma: f64,
    pub fs_hz: f64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::SpecInvalid(m));
        if self.n_classes < 2 {
            return bad(format!("n_classes = {} (need at least 2)", self.n_classes));
        }
        if self.n_trials < self.n_classes {
            return bad(format!(
                "{} trials cannot cover {} classes",
                self.n_trials, self.n_classes
            ));
        }
        if self.n_channels == 0 || self.n_samples == 0 {
            return bad("zero channels or samples".into());
        }
        if self.informative_channels.check_bounds(self.n_channels).is_err() {
            return bad(format!(
                "informative channels {} exceed {} channels",
                self.informative_channels, self.n_channels
            ));
        }
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return bad(format!("separation {}", self.separation));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma > 0.0) {
            return bad(format!("noise_sigma {}", self.noise_sigma));
        }
        if !(self.fs_hz.is_finite() && self.fs_hz > 0.0) {
            return bad(format!("fs_hz {}", self.fs_hz));
        }
        Ok(())
    }

    /// Amplitude multiplier applied to informative channels for `class`.
    pub fn class_gain(&self, class: u32) -> f64 {
        let centered = class as f64 - (self.n_classes as f64 + 1.0) / 2.0;
        let log_var_shift = self.separation * (2.0 / self.n_samples as f64).sqrt() * centered;
        (0.5 * log_var_shift).exp()
    }

    /// The 22-channel montage when the geometry matches it, `Ch1..ChN` otherwise.
    pub fn montage(&self) -> Result<Montage> {
        if self.n_channels == BCI_IV_2A_CHANNELS.len() {
            Ok(Montage::new(
                BCI_IV_2A_CHANNELS.iter().map(|s| s.to_string()).collect(),
                self.fs_hz,
            )?)
        } else {
            Montage::numbered(self.n_channels, self.fs_hz)
        }
    }
}

pub fn synth(spec: &SynthSpec, seed: u64) -> Result<TrialSet> {
    spec.validate()?;
    let montage = spec.montage()?;
    let k = spec.n_classes as u32;
    let labels: Vec<u32> = (0..spec.n_trials).map(|t| (t as u32 % k) + 1).collect();
    let gains: Vec<f64> = (1..=k).map(|y| spec.class_gain(y)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(spec.n_trials * spec.n_channels * spec.n_samples);
    for &y in &labels {
        for ch in 0..spec.n_channels {
            let scale = if spec.informative_channels.contains(ch) {
                spec.noise_sigma * gains[y as usize - 1]
            } else {
                spec.noise_sigma
            };
            for _ in 0..spec.n_samples {
                let z: f64 = StandardNormal.sample(&mut rng);
                samples.push((scale * z) as f32);
            }
        }
    }
    TrialSet::new(montage, spec.n_samples, labels, samples)
}
