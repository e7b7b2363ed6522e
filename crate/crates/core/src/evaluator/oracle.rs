use serde::{Deserialize, Serialize};

use super::SubsetEvaluator;
use crate::error::{Error, Result};
use crate::model::{ChannelSubset, EvalResult};

/// Dataset-free scoring rule for exercising selectors:
/// `clamp01(base + gain·|S ∩ I| − penalty·|S \ I|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub informative: ChannelSubset,
    pub base: f64,
    pub gain: f64,
    pub penalty: f64,
}

impl OracleSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = self.base.is_finite() && self.gain.is_finite() && self.penalty.is_finite();
        if !finite || self.gain < 0.0 || self.penalty < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "oracle needs finite base and non-negative gain/penalty (base {}, gain {}, penalty {})",
                self.base, self.gain, self.penalty
            )));
        }
        Ok(())
    }

    pub fn id(&self) -> String {
        format!(
            "oracle/informative={}/base={}/gain={}/penalty={}",
            self.informative, self.base, self.gain, self.penalty
        )
    }
}

pub fn evaluate_oracle(subset: &ChannelSubset, spec: &OracleSpec) -> EvalResult {
    let hits = subset.indices().iter().filter(|&&c| spec.informative.contains(c)).count();
    let misses = subset.len() - hits;
    let raw = spec.base + spec.gain * hits as f64 - spec.penalty * misses as f64;
    EvalResult {
        subset: subset.clone(),
        accuracy: raw.clamp(0.0, 1.0),
        per_fold: None,
        evaluator_id: spec.id(),
        seed: 0,
        wall_time_ms: 0,
    }
}

#[derive(Debug, Clone)]
pub struct OracleEvaluator {
    spec: OracleSpec,
    n_channels: usize,
}

impl OracleEvaluator {
    pub fn new(spec: OracleSpec, n_channels: usize) -> Result<Self> {
        spec.validate()?;
        spec.informative.check_bounds(n_channels)?;
        Ok(OracleEvaluator { spec, n_channels })
    }

    pub fn spec(&self) -> &OracleSpec {
        &self.spec
    }
}

impl SubsetEvaluator for OracleEvaluator {
    fn id(&self) -> String {
        self.spec.id()
    }

    fn evaluate(&self, subset: &ChannelSubset, seed: u64) -> Result<EvalResult> {
        subset.check_bounds(self.n_channels)?;
        Ok(EvalResult {
            seed,
            ..evaluate_oracle(subset, &self.spec)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(base: f64, penalty: f64) -> OracleSpec {
        OracleSpec {
            informative: ChannelSubset::canonicalize(&[2, 5], 8).unwrap(),
            base,
            gain: 0.1,
            penalty,
        }
    }

    fn acc(s: &OracleSpec, idx: &[usize]) -> f64 {
        evaluate_oracle(&ChannelSubset::canonicalize(idx, 8).unwrap(), s).accuracy
    }

    #[test]
    fn formula() {
        let s = spec(0.5, 0.01);
        assert!((acc(&s, &[2]) - 0.60).abs() < 1e-12);
        assert!((acc(&s, &[2, 5]) - 0.70).abs() < 1e-12);
        assert!((acc(&s, &[0, 1, 2, 5]) - 0.68).abs() < 1e-12);
        assert_eq!(acc(&spec(1.2, 0.01), &[2]), 1.0);
        assert_eq!(acc(&spec(0.0, 0.5), &[0, 1]), 0.0);
    }

    #[test]
    fn monotone_without_penalty() {
        let s = spec(0.3, 0.0);
        let mut prev = 0.0;
        let mut subset = vec![];
        for c in [7, 2, 0, 5, 1] {
            subset.push(c);
            let a = acc(&s, &subset);
            assert!(a >= prev);
            prev = a;
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = spec(0.5, 0.01);
        s.gain = -0.1;
        assert!(OracleEvaluator::new(s, 8).is_err());
        assert!(OracleEvaluator::new(spec(f64::NAN, 0.0), 8).is_err());
        assert!(OracleEvaluator::new(spec(0.5, 0.0), 4).is_err());
    }

    #[test]
    fn evaluator_checks_bounds_and_echoes_seed() {
        let ev = OracleEvaluator::new(spec(0.5, 0.01), 8).unwrap();
        let r = ev.evaluate(&ChannelSubset::canonicalize(&[5], 8).unwrap(), 42).unwrap();
        assert_eq!(r.seed, 42);
        let wide = ChannelSubset::canonicalize(&[9], 10).unwrap();
        assert!(matches!(ev.evaluate(&wide, 0), Err(Error::IndexOutOfRange { .. })));
    }
}
