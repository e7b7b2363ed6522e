//! Subset evaluators: the built-in cross-validated classifier, a formula
//! oracle, an external process, and a cache that can front any of them.

pub mod builtin;
pub mod cache;
pub mod external;
pub mod features;
pub mod folds;
pub mod lda;
pub mod oracle;

use crate::error::Result;
use crate::model::{ChannelSubset, EvalResult};

pub use builtin::{evaluate_builtin, extract_features, BuiltinEvalConfig, BuiltinEvaluator};
pub use cache::{CachedEvaluator, EvalCache, EvalCacheKey, CACHE_DIR_ENV};
pub use external::{ExternalConfig, ExternalEvaluator, ExternalSession};
pub use folds::stratified_folds;
pub use lda::{fit_shrinkage_lda, LdaModel};
pub use oracle::{evaluate_oracle, OracleEvaluator, OracleSpec};

/// Maps a channel subset (and seed) to an accuracy in `[0, 1]`.
pub trait SubsetEvaluator: Send + Sync {
    /// Stable identity of the backend and its configuration.
    fn id(&self) -> String;

    fn evaluate(&self, subset: &ChannelSubset, seed: u64) -> Result<EvalResult>;
}

impl<E: SubsetEvaluator + ?Sized> SubsetEvaluator for &E {
    fn id(&self) -> String {
        (**self).id()
    }

    fn evaluate(&self, subset: &ChannelSubset, seed: u64) -> Result<EvalResult> {
        (**self).evaluate(subset, seed)
    }
}

impl<E: SubsetEvaluator + ?Sized> SubsetEvaluator for Box<E> {
    fn id(&self) -> String {
        (**self).id()
    }

    fn evaluate(&self, subset: &ChannelSubset, seed: u64) -> Result<EvalResult> {
        (**self).evaluate(subset, seed)
    }
}
