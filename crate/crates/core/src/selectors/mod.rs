//! Channel-subset search strategies and the shared batch executor.

mod random;
mod region;
mod search;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::SubsetEvaluator;
use crate::model::{ChannelSubset, EvalResult, SelectionTrace};

pub use random::{sample_masks, score_channels, weighted_random_search, RandomOutcome, ScoreMode, WeightedRandomConfig};
pub use region::{row_prefix, task_based_subset, RegionSpec};
pub use search::{exhaustive_search, greedy_forward_search, EXHAUSTIVE_GUARD};

/// Runs batches of evaluations on a bounded thread pool. Results always come
/// back in submission order, so reductions over them do not depend on which
/// candidate finished first.
pub struct Executor {
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    /// `jobs == 0` means one thread per core; `jobs == 1` runs inline.
    pub fn new(jobs: usize) -> Result<Self> {
        if jobs == 1 {
            return Ok(Executor { pool: None });
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidSelector(format!("thread pool: {e}")))?;
        Ok(Executor { pool: Some(pool) })
    }

    pub fn sequential() -> Self {
        Executor { pool: None }
    }

    pub fn threads(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    /// Evaluates every subset; on failure returns the error of the earliest
    /// failing subset in submission order.
    pub fn evaluate_all(&self, ev: &dyn SubsetEvaluator, subsets: &[ChannelSubset], seed: u64) -> Result<Vec<EvalResult>> {
        let results: Vec<Result<EvalResult>> = match &self.pool {
            None => subsets.iter().map(|s| ev.evaluate(s, seed)).collect(),
            Some(pool) => pool.install(|| subsets.par_iter().map(|s| ev.evaluate(s, seed)).collect()),
        };
        results.into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub size: usize,
    pub accuracy: f64,
    pub subset: ChannelSubset,
}

/// Best accuracy per subset size, sizes ascending. Among equal accuracies the
/// earliest step in the trace supplies the subset.
pub fn accuracy_curve(trace: &SelectionTrace) -> Vec<CurvePoint> {
    let mut by_size: std::collections::BTreeMap<usize, CurvePoint> = Default::default();
    for step in &trace.steps {
        let size = step.subset.len();
        let better = by_size.get(&size).is_none_or(|p| step.accuracy > p.accuracy);
        if better {
            by_size.insert(
                size,
                CurvePoint {
                    size,
                    accuracy: step.accuracy,
                    subset: step.subset.clone(),
                },
            );
        }
    }
    by_size.into_values().collect()
}
