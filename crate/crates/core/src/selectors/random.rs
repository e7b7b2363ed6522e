//! Weighted random search: sample `k` random subsets, weight each channel by the
//! accuracies of the subsets it appeared in, and rank channels by that score.
//!
//! ```text
//! v_i = Σ_j p_ji · w_j        (p_ji = 1 when channel i is in subset j)
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Executor;
use crate::error::{Error, Result};
use crate::evaluator::SubsetEvaluator;
use crate::model::{ChannelSubset, Method, ScoreVector, SelectionTrace, SubsetMask, TraceStep};

const MAX_EMPTY_DRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// The plain weighted sum.
    #[default]
    RawSum,
    /// The weighted sum divided by how often the channel was drawn.
    OccurrenceMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedRandomConfig {
    pub k: usize,
    pub p_include: f64,
    /// Seeds mask sampling only; evaluation seeds are passed separately.
    pub seed: u64,
    pub target_size: Option<usize>,
    #[serde(default)]
    pub score_mode: ScoreMode,
}

impl WeightedRandomConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        WeightedRandomConfig {
            k,
            p_include: 0.5,
            seed,
            target_size: None,
            score_mode: ScoreMode::RawSum,
        }
    }

    pub fn validate(&self, c: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidSelector("k must be at least 1".into()));
        }
        if !(self.p_include > 0.0 && self.p_include < 1.0) {
            return Err(Error::InvalidSelector(format!("inclusion probability {} outside (0, 1)", self.p_include)));
        }
        if let Some(t) = self.target_size {
            if t == 0 || t > c {
                return Err(Error::InvalidSelector(format!("target size {t} outside [1, {c}]")));
            }
        }
        Ok(())
    }
}

/// `k` masks of width `c`, each bit set independently with probability
/// `p_include`. All-zero draws are redrawn.
pub fn sample_masks(cfg: &WeightedRandomConfig, c: usize) -> Result<Vec<SubsetMask>> {
    cfg.validate(c)?;
    if c == 0 {
        return Err(Error::EmptySubset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut masks = Vec::with_capacity(cfg.k);
    for _ in 0..cfg.k {
        let mut empty = 0;
        loop {
            let bits: Vec<bool> = (0..c).map(|_| rng.random_bool(cfg.p_include)).collect();
            if bits.iter().any(|&b| b) {
                masks.push(SubsetMask::from_bits(bits));
                break;
            }
            empty += 1;
            if empty == MAX_EMPTY_DRAWS {
                return Err(Error::DegenerateSampling(empty));
            }
        }
    }
    Ok(masks)
}

/// Per-channel scores. Sums run over `j` in list order.
pub fn score_channels(masks: &[SubsetMask], weights: &[f64], mode: ScoreMode) -> Result<ScoreVector> {
    if masks.len() != weights.len() || masks.is_empty() {
        return Err(Error::LengthMismatch {
            masks: masks.len(),
            weights: weights.len(),
        });
    }
    let width = masks[0].width();
    if let Some(m) = masks.iter().find(|m| m.width() != width) {
        return Err(Error::WidthMismatch {
            expected: width,
            found: m.width(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
        return Err(Error::InvalidSelector(format!("non-finite weight {w}")));
    }
    let mut scores = vec![0.0; width];
    let mut occurrences = vec![0usize; width];
    for (mask, &w) in masks.iter().zip(weights) {
        for (i, &bit) in mask.bits().iter().enumerate() {
            if bit {
                scores[i] += w;
                occurrences[i] += 1;
            }
        }
    }
    if mode == ScoreMode::OccurrenceMean {
        for (v, &n) in scores.iter_mut().zip(&occurrences) {
            *v /= n.max(1) as f64;
        }
    }
    Ok(ScoreVector {
        scores,
        k_subsets: masks.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomOutcome {
    pub scores: ScoreVector,
    pub ranking: Vec<usize>,
    /// The `k` sampled evaluations, then the top-`target_size` subset if requested.
    pub trace: SelectionTrace,
    pub selected: Option<ChannelSubset>,
}

pub fn weighted_random_search(
    ev: &dyn SubsetEvaluator,
    c: usize,
    cfg: &WeightedRandomConfig,
    eval_seed: u64,
    exec: &Executor,
) -> Result<RandomOutcome> {
    let masks = sample_masks(cfg, c)?;
    let subsets: Vec<ChannelSubset> = masks.iter().map(|m| m.to_subset()).collect::<Result<_>>()?;
    let results = exec.evaluate_all(ev, &subsets, eval_seed)?;
    let weights: Vec<f64> = results.iter().map(|r| r.accuracy).collect();
    let scores = score_channels(&masks, &weights, cfg.score_mode)?;
    let ranking = scores.ranking();

    let mut steps: Vec<TraceStep> = results
        .into_iter()
        .map(|r| TraceStep {
            subset: r.subset,
            accuracy: r.accuracy,
            candidates_evaluated: 1,
        })
        .collect();
    let selected = match cfg.target_size {
        Some(t) => {
            let top = ChannelSubset::canonicalize(&ranking[..t], c)?;
            let r = ev.evaluate(&top, eval_seed)?;
            steps.push(TraceStep {
                subset: r.subset,
                accuracy: r.accuracy,
                candidates_evaluated: 1,
            });
            Some(top)
        }
        None => None,
    };
    Ok(RandomOutcome {
        scores,
        ranking,
        trace: SelectionTrace::new(Method::WeightedRandom, steps),
        selected,
    })
}
