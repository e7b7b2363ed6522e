//! Built-in subset evaluator: log band-power features, shrinkage LDA and
//! stratified k-fold cross-validation with pooled accuracy.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::features::{extract_with, FeatureMode, Features};
use super::folds::stratified_folds;
use super::lda::fit_shrinkage_lda;
use super::SubsetEvaluator;
use crate::error::{Error, Result};
use crate::model::{restrict, ChannelSubset, EvalResult, FoldScore, TrialSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuiltinEvalConfig {
    pub n_folds: usize,
    pub shrinkage_gamma: f64,
    pub bands_hz: Vec<(f64, f64)>,
    /// Use one log-variance feature per channel when the bands do not fit below
    /// Nyquist.
    pub broadband_fallback: bool,
}

impl Default for BuiltinEvalConfig {
    fn default() -> Self {
        BuiltinEvalConfig {
            n_folds: 5,
            shrinkage_gamma: 0.1,
            bands_hz: vec![(4.0, 8.0), (8.0, 13.0), (13.0, 30.0)],
            broadband_fallback: true,
        }
    }
}

impl BuiltinEvalConfig {
    /// Checks the config against a sampling rate and picks the feature mode.
    pub fn feature_mode(&self, fs_hz: f64) -> Result<FeatureMode> {
        if self.n_folds < 2 {
            return Err(Error::InvalidConfig(format!("{} folds (need at least 2)", self.n_folds)));
        }
        if !(0.0..=1.0).contains(&self.shrinkage_gamma) {
            return Err(Error::InvalidConfig(format!(
                "shrinkage gamma {} outside [0, 1]",
                self.shrinkage_gamma
            )));
        }
        for &(low, high) in &self.bands_hz {
            if !(low.is_finite() && high.is_finite() && low >= 0.0 && low < high) {
                return Err(Error::InvalidConfig(format!("band ({low}, {high})")));
            }
        }
        let nyquist = fs_hz / 2.0;
        let fits = !self.bands_hz.is_empty() && self.bands_hz.iter().all(|&(_, high)| high < nyquist);
        match (fits, self.broadband_fallback) {
            (true, _) => Ok(FeatureMode::Bands(self.bands_hz.clone())),
            (false, true) => Ok(FeatureMode::Broadband),
            (false, false) => Err(Error::InvalidConfig(format!(
                "bands do not fit below Nyquist ({nyquist} Hz) and broadband fallback is off"
            ))),
        }
    }

    /// Stable identifier; part of every cache key.
    pub fn id(&self, mode: &FeatureMode) -> String {
        let features = match mode {
            FeatureMode::Broadband => "broadband".to_string(),
            FeatureMode::Bands(b) => b
                .iter()
                .map(|(l, h)| format!("{l}-{h}"))
                .collect::<Vec<_>>()
                .join(","),
        };
        format!(
            "builtin-lda/folds={}/gamma={}/features={features}",
            self.n_folds, self.shrinkage_gamma
        )
    }
}

pub fn extract_features(trials: &TrialSet, cfg: &BuiltinEvalConfig) -> Result<Features> {
    let mode = cfg.feature_mode(trials.montage().fs_hz())?;
    Ok(extract_with(trials, &mode))
}

/// Pooled cross-validated accuracy of shrinkage LDA on `features`.
pub fn cross_validate(features: &Features, labels: &[u32], cfg: &BuiltinEvalConfig, seed: u64) -> Result<Vec<FoldScore>> {
    let folds = stratified_folds(labels, cfg.n_folds, seed)?;
    (0..cfg.n_folds)
        .map(|fold| {
            let (train, test): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| folds[i] != fold);
            let rows: Vec<&[f64]> = train.iter().map(|&i| features.row(i)).collect();
            let train_labels: Vec<u32> = train.iter().map(|&i| labels[i]).collect();
            let model = fit_shrinkage_lda(&rows, &train_labels, cfg.shrinkage_gamma)?;
            let correct = test
                .iter()
                .filter(|&&i| model.predict(features.row(i)) == labels[i])
                .count();
            Ok(FoldScore {
                correct,
                total: test.len(),
            })
        })
        .collect()
}

fn pooled(folds: &[FoldScore]) -> f64 {
    let correct: usize = folds.iter().map(|f| f.correct).sum();
    let total: usize = folds.iter().map(|f| f.total).sum();
    correct as f64 / total as f64
}

/// Restrict, extract and cross-validate in one pass.
pub fn evaluate_builtin(trials: &TrialSet, subset: &ChannelSubset, cfg: &BuiltinEvalConfig, seed: u64) -> Result<EvalResult> {
    let started = Instant::now();
    let mode = cfg.feature_mode(trials.montage().fs_hz())?;
    let restricted = restrict(trials, subset)?;
    let features = extract_with(&restricted, &mode);
    let folds = cross_validate(&features, trials.labels(), cfg, seed)?;
    Ok(EvalResult {
        subset: subset.clone(),
        accuracy: pooled(&folds),
        per_fold: Some(folds),
        evaluator_id: cfg.id(&mode),
        seed,
        wall_time_ms: started.elapsed().as_millis() as u64,
    })
}

/// [`evaluate_builtin`] with the per-channel features computed once up front.
pub struct BuiltinEvaluator {
    cfg: BuiltinEvalConfig,
    id: String,
    per_channel: usize,
    n_channels: usize,
    features: Features,
    labels: Vec<u32>,
}

impl BuiltinEvaluator {
    pub fn new(trials: &TrialSet, cfg: BuiltinEvalConfig) -> Result<Self> {
        let mode = cfg.feature_mode(trials.montage().fs_hz())?;
        let min_class = trials.class_counts().into_iter().min().unwrap_or(0);
        if min_class < cfg.n_folds {
            let class = trials.class_counts().iter().position(|&c| c == min_class).unwrap_or(0);
            return Err(Error::ClassTooSmall {
                class: class as u32 + 1,
                count: min_class,
            });
        }
        Ok(BuiltinEvaluator {
            id: cfg.id(&mode),
            per_channel: mode.per_channel(),
            n_channels: trials.n_channels(),
            features: extract_with(trials, &mode),
            labels: trials.labels().to_vec(),
            cfg,
        })
    }
}

impl SubsetEvaluator for BuiltinEvaluator {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn evaluate(&self, subset: &ChannelSubset, seed: u64) -> Result<EvalResult> {
        let started = Instant::now();
        subset.check_bounds(self.n_channels)?;
        let features = self.features.select_channels(subset.indices(), self.per_channel);
        let folds = cross_validate(&features, &self.labels, &self.cfg, seed)?;
        Ok(EvalResult {
            subset: subset.clone(),
            accuracy: pooled(&folds),
            per_fold: Some(folds),
            evaluator_id: self.id.clone(),
            seed,
            wall_time_ms: started.elapsed().as_millis() as u64,
        })
    }
}
