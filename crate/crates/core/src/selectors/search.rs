use super::Executor;
use crate::error::{Error, Result};
use crate::evaluator::SubsetEvaluator;
use crate::model::{ChannelSubset, EvalResult, Method, SelectionTrace, TraceStep};

/// Default ceiling on `c` for exhaustive search (2^20 − 1 subsets).
pub const EXHAUSTIVE_GUARD: usize = 20;

const BATCH: usize = 4096;

/// Evaluates all `2^c − 1` non-empty subsets. The trace holds the best subset
/// of every size; ties, both within a size and for `best_step`, go to the
/// lexicographically smallest index list. `guard: None` lifts the size limit.
pub fn exhaustive_search(
    ev: &dyn SubsetEvaluator,
    c: usize,
    seed: u64,
    guard: Option<usize>,
    exec: &Executor,
) -> Result<SelectionTrace> {
    if c == 0 {
        return Err(Error::EmptySubset);
    }
    if let Some(limit) = guard {
        if c > limit {
            return Err(Error::TooManyChannels(c, limit));
        }
    }
    if c >= usize::BITS as usize {
        return Err(Error::TooManyChannels(c, usize::BITS as usize - 1));
    }

    let mut best: Vec<Option<(f64, ChannelSubset)>> = vec![None; c + 1];
    let mut counts = vec![0usize; c + 1];
    let total: usize = (1usize << c) - 1;
    let mut next = 1usize;
    while next <= total {
        let end = total.min(next + BATCH - 1);
        let subsets: Vec<ChannelSubset> = (next..=end).map(|bits| from_bits(bits, c)).collect();
        for r in exec.evaluate_all(ev, &subsets, seed)? {
            let size = r.subset.len();
            counts[size] += 1;
            if beats(&r, best[size].as_ref()) {
                best[size] = Some((r.accuracy, r.subset));
            }
        }
        next = end + 1;
    }

    let steps: Vec<TraceStep> = (1..=c)
        .map(|size| {
            let (accuracy, subset) = best[size].clone().expect("every size enumerated");
            TraceStep {
                subset,
                accuracy,
                candidates_evaluated: counts[size],
            }
        })
        .collect();
    let mut best_step = 0;
    for (i, s) in steps.iter().enumerate() {
        let incumbent = &steps[best_step];
        if s.accuracy > incumbent.accuracy
            || (s.accuracy == incumbent.accuracy && s.subset.indices() < incumbent.subset.indices())
        {
            best_step = i;
        }
    }
    Ok(SelectionTrace {
        method: Method::Exhaustive,
        steps,
        best_step,
    })
}

fn from_bits(bits: usize, c: usize) -> ChannelSubset {
    let idx: Vec<usize> = (0..c).filter(|i| bits >> i & 1 == 1).collect();
    ChannelSubset::canonicalize(&idx, c).expect("non-zero mask")
}

fn beats(r: &EvalResult, incumbent: Option<&(f64, ChannelSubset)>) -> bool {
    match incumbent {
        None => true,
        Some((acc, subset)) => r.accuracy > *acc || (r.accuracy == *acc && r.subset.indices() < subset.indices()),
    }
}

/// Forward search: start from the best singleton and add the best remaining
/// channel at each step until all `c` are used, for `c(c+1)/2` evaluations.
/// Ties go to the candidate adding the smallest channel index.
///
/// If a step fails, the error comes back as [`Error::Aborted`] carrying the
/// steps completed so far.
pub fn greedy_forward_search(ev: &dyn SubsetEvaluator, c: usize, seed: u64, exec: &Executor) -> Result<SelectionTrace> {
    if c == 0 {
        return Err(Error::EmptySubset);
    }
    let mut steps: Vec<TraceStep> = Vec::with_capacity(c);
    let mut kept: Option<ChannelSubset> = None;
    for _ in 0..c {
        let candidates: Vec<ChannelSubset> = (0..c)
            .filter(|&ch| kept.as_ref().is_none_or(|k| !k.contains(ch)))
            .map(|ch| match &kept {
                Some(k) => k.with(ch),
                None => ChannelSubset::canonicalize(&[ch], c).expect("in range"),
            })
            .collect();
        let results = match exec.evaluate_all(ev, &candidates, seed) {
            Ok(r) => r,
            Err(source) => {
                return Err(Error::Aborted {
                    trace: Box::new(SelectionTrace::new(Method::Greedy, steps)),
                    source: Box::new(source),
                })
            }
        };
        let mut winner = 0;
        for (i, r) in results.iter().enumerate() {
            if r.accuracy > results[winner].accuracy {
                winner = i;
            }
        }
        let r = &results[winner];
        steps.push(TraceStep {
            subset: r.subset.clone(),
            accuracy: r.accuracy,
            candidates_evaluated: candidates.len(),
        });
        kept = Some(r.subset.clone());
    }
    Ok(SelectionTrace::new(Method::Greedy, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::{OracleEvaluator, OracleSpec};

    fn oracle(c: usize, informative: &[usize], base: f64, gain: f64, penalty: f64) -> OracleEvaluator {
        let spec = OracleSpec {
            informative: ChannelSubset::canonicalize(informative, c).unwrap(),
            base,
            gain,
            penalty,
        };
        OracleEvaluator::new(spec, c).unwrap()
    }

    struct SizeOracle(usize);

    impl SubsetEvaluator for SizeOracle {
        fn id(&self) -> String {
            "size".into()
        }
        fn evaluate(&self, subset: &ChannelSubset, seed: u64) -> Result<EvalResult> {
            Ok(EvalResult {
                subset: subset.clone(),
                accuracy: subset.len() as f64 / self.0 as f64,
                per_fold: None,
                evaluator_id: self.id(),
                seed,
                wall_time_ms: 0,
            })
        }
    }

    #[test]
    fn exhaustive_small_cases() {
        let seq = Executor::sequential();
        let t = exhaustive_search(&oracle(1, &[0], 0.5, 0.1, 0.0), 1, 0, Some(20), &seq).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.steps[0].subset.indices(), &[0]);

        // hand enumeration: {2} = .60; {0},{1} = .49; {0,2},{1,2} = .59; {0,1} = .48; {0,1,2} = .58
        let t = exhaustive_search(&oracle(3, &[2], 0.5, 0.1, 0.01), 3, 0, Some(20), &seq).unwrap();
        assert_eq!(t.total_candidates(), 7);
        assert_eq!(t.best().unwrap().subset.indices(), &[2]);
        assert!((t.best().unwrap().accuracy - 0.60).abs() < 1e-12);
        assert_eq!(t.steps[1].subset.indices(), &[0, 2]);
        assert_eq!(t.steps.iter().map(|s| s.candidates_evaluated).collect::<Vec<_>>(), [3, 3, 1]);

        assert!(matches!(
            exhaustive_search(&oracle(25, &[0], 0.5, 0.1, 0.0), 25, 0, Some(EXHAUSTIVE_GUARD), &seq),
            Err(Error::TooManyChannels(25, 20))
        ));
    }

    #[test]
    fn exhaustive_best_step_tie_is_lexicographic() {
        // every subset scores 1.0: {0} and {0,1,...} tie; [0] is the smallest list
        let t = exhaustive_search(&oracle(3, &[0, 1, 2], 1.0, 0.0, 0.0), 3, 0, None, &Executor::sequential()).unwrap();
        assert_eq!(t.best().unwrap().subset.indices(), &[0]);
        assert_eq!(t.steps[1].subset.indices(), &[0, 1]);
    }

    #[test]
    fn greedy_hand_example() {
        let t = greedy_forward_search(&oracle(8, &[2, 5], 0.5, 0.1, 0.01), 8, 0, &Executor::sequential()).unwrap();
        assert_eq!(t.steps[0].subset.indices(), &[2]);
        assert_eq!(t.steps[1].subset.indices(), &[2, 5]);
        assert!((t.steps[1].accuracy - 0.70).abs() < 1e-12);
        assert_eq!(t.best_step, 1);
        assert_eq!(t.total_candidates(), 36);
        for w in t.steps.windows(2) {
            assert!(w[0].subset.is_subset_of(&w[1].subset));
            assert_eq!(w[0].subset.len() + 1, w[1].subset.len());
        }
    }

    #[test]
    fn greedy_monotone_size_oracle() {
        let c = 6;
        let t = greedy_forward_search(&SizeOracle(c), c, 0, &Executor::sequential()).unwrap();
        for (i, s) in t.steps.iter().enumerate() {
            assert_eq!(s.accuracy, (i + 1) as f64 / c as f64);
            assert_eq!(s.subset.indices(), (0..=i).collect::<Vec<_>>());
        }
        assert_eq!(t.best_step, c - 1);
        let one = greedy_forward_search(&SizeOracle(1), 1, 0, &Executor::sequential()).unwrap();
        assert_eq!(one.steps.len(), 1);
    }

    #[test]
    fn greedy_aborts_with_partial_trace() {
        struct FailAt(usize);
        impl SubsetEvaluator for FailAt {
            fn id(&self) -> String {
                "fail".into()
            }
            fn evaluate(&self, subset: &ChannelSubset, seed: u64) -> Result<EvalResult> {
                if subset.len() == self.0 {
                    return Err(Error::EvaluatorError("nope".into()));
                }
                SizeOracle(5).evaluate(subset, seed)
            }
        }
        let err = greedy_forward_search(&FailAt(3), 5, 0, &Executor::sequential()).unwrap_err();
        match err {
            Error::Aborted { trace, source } => {
                assert_eq!(trace.steps.len(), 2);
                assert!(matches!(*source, Error::EvaluatorError(_)));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let ev = oracle(7, &[1, 4, 6], 0.4, 0.1, 0.03);
        let par = Executor::new(4).unwrap();
        let seq = Executor::sequential();
        assert_eq!(
            greedy_forward_search(&ev, 7, 0, &seq).unwrap(),
            greedy_forward_search(&ev, 7, 0, &par).unwrap()
        );
        assert_eq!(
            exhaustive_search(&ev, 7, 0, Some(20), &seq).unwrap(),
            exhaustive_search(&ev, 7, 0, Some(20), &par).unwrap()
        );
    }
}
