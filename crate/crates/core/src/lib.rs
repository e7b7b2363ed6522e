//! Wrapper-style EEG channel selection.
//!
//! A [`SubsetEvaluator`] maps channel subsets to accuracies; the selectors
//! (exhaustive, greedy forward, weighted random, task region) search over
//! subsets with it. Trial sets travel as ETS files.

pub mod dataio;
pub mod error;
pub mod evaluator;
pub mod model;
pub mod report;
pub mod selectors;

pub use error::{Error, Result};
pub use evaluator::SubsetEvaluator;
pub use model::{
    restrict, ChannelSubset, EvalResult, FoldScore, Method, Montage, ScoreVector, SelectionTrace, SubsetMask,
    TraceStep, TrialSet,
};
