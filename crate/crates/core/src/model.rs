//! Domain types shared by every module: montages, trial sets, channel subsets
//! and the records produced by evaluators and selectors.
//!
//! Channel indices are 0-based everywhere; montage names carry the
//! human-facing identity and are what reports print.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Electrode labels of the 22-channel BCI Competition IV 2a montage, in file order.
pub const BCI_IV_2A_CHANNELS: [&str; 22] = [
    "Fz", "FC3", "FC1", "FCz", "FC2", "FC4", "C5", "C3", "C1", "Cz", "C2", "C4", "C6", "CP3",
    "CP1", "CPz", "CP2", "CP4", "P1", "Pz", "P2", "POz",
];

/// Sampling rate of the BCI Competition IV 2a recordings.
pub const BCI_IV_2A_FS_HZ: f64 = 250.0;
/// Samples per trial window (4.5 s at 250 Hz).
pub const BCI_IV_2A_SAMPLES: usize = 1125;
/// Motor-imagery classes: left hand, right hand, feet, tongue.
pub const BCI_IV_2A_CLASSES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Montage {
    channel_names: Vec<String>,
    fs_hz: f64,
}

impl Montage {
    pub fn new(channel_names: Vec<String>, fs_hz: f64) -> Result<Self> {
        if channel_names.is_empty() {
            return Err(Error::InvalidMontage("no channels".into()));
        }
        if !(fs_hz.is_finite() && fs_hz > 0.0) {
            return Err(Error::InvalidMontage(format!("sampling rate {fs_hz} Hz")));
        }
        let mut seen = HashSet::new();
        for name in &channel_names {
            if name.trim().is_empty() {
                return Err(Error::InvalidMontage("empty channel name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidMontage(format!("duplicate channel {name:?}")));
            }
        }
        Ok(Montage {
            channel_names,
            fs_hz,
        })
    }

    pub fn bci_iv_2a() -> Self {
        let names = BCI_IV_2A_CHANNELS.iter().map(|s| s.to_string()).collect();
        Montage::new(names, BCI_IV_2A_FS_HZ).expect("static montage is valid")
    }

    /// `Ch1..ChN` placeholder labels.
    pub fn numbered(n_channels: usize, fs_hz: f64) -> Result<Self> {
        Montage::new((1..=n_channels).map(|i| format!("Ch{i}")).collect(), fs_hz)
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn fs_hz(&self) -> f64 {
        self.fs_hz
    }

    pub fn n_channels(&self) -> usize {
        self.channel_names.len()
    }

    /// Case-insensitive lookup.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.channel_names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
    }

    pub fn names_of(&self, subset: &ChannelSubset) -> Vec<String> {
        subset
            .indices()
            .iter()
            .map(|&i| self.channel_names[i].clone())
            .collect()
    }
}

/// N labelled trials of C×T samples, stored trial-major, then channel, then time.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    montage: Montage,
    n_trials: usize,
    n_samples: usize,
    n_classes: usize,
    labels: Vec<u32>,
    samples: Vec<f32>,
}

impl TrialSet {
    /// Builds a trial set; the class count is the largest label, and every class
    /// in `1..=K` must occur at least once.
    pub fn new(montage: Montage, n_samples: usize, labels: Vec<u32>, samples: Vec<f32>) -> Result<Self> {
        let n_trials = labels.len();
        if n_trials == 0 {
            return Err(Error::InvalidTrialSet("no trials".into()));
        }
        if n_samples == 0 {
            return Err(Error::InvalidTrialSet("zero samples per trial".into()));
        }
        let expected = n_trials * montage.n_channels() * n_samples;
        if samples.len() != expected {
            return Err(Error::InvalidTrialSet(format!(
                "{} samples for {n_trials}x{}x{n_samples}",
                samples.len(),
                montage.n_channels()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        if labels.contains(&0) {
            return Err(Error::InvalidTrialSet("class labels start at 1".into()));
        }
        let n_classes = *labels.iter().max().expect("non-empty") as usize;
        let mut present = vec![false; n_classes];
        for &l in &labels {
            present[l as usize - 1] = true;
        }
        if let Some(k) = present.iter().position(|p| !p) {
            return Err(Error::InvalidTrialSet(format!("class {} has no trials", k + 1)));
        }
        Ok(TrialSet {
            montage,
            n_trials,
            n_samples,
            n_classes,
            labels,
            samples,
        })
    }

    pub fn montage(&self) -> &Montage {
        &self.montage
    }

    pub fn n_trials(&self) -> usize {
        self.n_trials
    }

    pub fn n_channels(&self) -> usize {
        self.montage.n_channels()
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    /// The time series of one channel in one trial.
    pub fn channel(&self, trial: usize, channel: usize) -> &[f32] {
        let start = (trial * self.n_channels() + channel) * self.n_samples;
        &self.samples[start..start + self.n_samples]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l as usize - 1] += 1;
        }
        counts
    }

    /// Same samples with different labels; used for permutation controls.
    pub fn with_labels(&self, labels: Vec<u32>) -> Result<TrialSet> {
        if labels.len() != self.n_trials {
            return Err(Error::InvalidTrialSet("label count differs from trial count".into()));
        }
        TrialSet::new(self.montage.clone(), self.n_samples, labels, self.samples.clone())
    }
}

/// Restricts a trial set to a channel subset, keeping channels in subset order.
pub fn restrict(trials: &TrialSet, subset: &ChannelSubset) -> Result<TrialSet> {
    let c = trials.n_channels();
    subset.check_bounds(c)?;
    let t = trials.n_samples();
    let mut samples = Vec::with_capacity(trials.n_trials() * subset.len() * t);
    for trial in 0..trials.n_trials() {
        for &ch in subset.indices() {
            samples.extend_from_slice(trials.channel(trial, ch));
        }
    }
    let montage = Montage::new(trials.montage().names_of(subset), trials.montage().fs_hz())?;
    TrialSet::new(montage, t, trials.labels().to_vec(), samples)
}

/// A non-empty set of channel indices kept in strictly increasing order, so two
/// subsets with the same members compare (and hash) equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ChannelSubset(Vec<usize>);

impl ChannelSubset {
    /// Sorts and deduplicates `indices`, checking each against `n_channels`.
    pub fn canonicalize(indices: &[usize], n_channels: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySubset);
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= n_channels) {
            return Err(Error::IndexOutOfRange {
                index,
                channels: n_channels,
            });
        }
        let mut v = indices.to_vec();
        v.sort_unstable();
        v.dedup();
        Ok(ChannelSubset(v))
    }

    pub fn full(n_channels: usize) -> Result<Self> {
        ChannelSubset::canonicalize(&(0..n_channels).collect::<Vec<_>>(), n_channels)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, channel: usize) -> bool {
        self.0.binary_search(&channel).is_ok()
    }

    pub fn is_subset_of(&self, other: &ChannelSubset) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    /// This subset plus one more channel.
    pub fn with(&self, channel: usize) -> ChannelSubset {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&channel) {
            v.insert(pos, channel);
        }
        ChannelSubset(v)
    }

    pub fn check_bounds(&self, n_channels: usize) -> Result<()> {
        match self.0.last() {
            Some(&index) if index >= n_channels => Err(Error::IndexOutOfRange {
                index,
                channels: n_channels,
            }),
            _ => Ok(()),
        }
    }

    pub fn to_mask(&self, n_channels: usize) -> Result<SubsetMask> {
        mask_of(self, n_channels)
    }
}

impl TryFrom<Vec<usize>> for ChannelSubset {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        ChannelSubset::canonicalize(&v, usize::MAX)
    }
}

impl From<ChannelSubset> for Vec<usize> {
    fn from(s: ChannelSubset) -> Vec<usize> {
        s.0
    }
}

impl fmt::Display for ChannelSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// One-hot membership vector of a subset over all C channels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetMask(Vec<bool>);

impl SubsetMask {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        SubsetMask(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn to_subset(&self) -> Result<ChannelSubset> {
        subset_of(self)
    }
}

pub fn mask_of(subset: &ChannelSubset, n_channels: usize) -> Result<SubsetMask> {
    subset.check_bounds(n_channels)?;
    let mut bits = vec![false; n_channels];
    for &i in subset.indices() {
        bits[i] = true;
    }
    Ok(SubsetMask(bits))
}

pub fn subset_of(mask: &SubsetMask) -> Result<ChannelSubset> {
    let indices: Vec<usize> = mask
        .0
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect();
    if indices.is_empty() {
        return Err(Error::AllZeroMask);
    }
    Ok(ChannelSubset(indices))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldScore {
    pub correct: usize,
    pub total: usize,
}

impl FoldScore {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

/// What an evaluator reports for one subset. `accuracy` is the weight w_j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub subset: ChannelSubset,
    pub accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_fold: Option<Vec<FoldScore>>,
    pub evaluator_id: String,
    pub seed: u64,
    pub wall_time_ms: u64,
}

impl EvalResult {
    pub fn per_fold_accuracy(&self) -> Option<Vec<f64>> {
        self.per_fold
            .as_ref()
            .map(|folds| folds.iter().map(FoldScore::accuracy).collect())
    }
}

/// Per-channel scores v_i accumulated from `k_subsets` weighted masks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    pub k_subsets: usize,
}

impl ScoreVector {
    /// Channel indices by descending score; equal scores keep index order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(a.cmp(&b)));
        order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exhaustive,
    Greedy,
    WeightedRandom,
    TaskBased,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exhaustive => "exhaustive",
            Method::Greedy => "greedy",
            Method::WeightedRandom => "weighted_random",
            Method::TaskBased => "task_based",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub subset: ChannelSubset,
    pub accuracy: f64,
    pub candidates_evaluated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub method: Method,
    pub steps: Vec<TraceStep>,
    pub best_step: usize,
}

impl SelectionTrace {
    /// `best_step` is the first step attaining the maximum accuracy.
    pub fn new(method: Method, steps: Vec<TraceStep>) -> Self {
        let mut best = 0;
        for (i, s) in steps.iter().enumerate() {
            if s.accuracy > steps[best].accuracy {
                best = i;
            }
        }
        SelectionTrace {
            method,
            steps,
            best_step: best,
        }
    }

    pub fn best(&self) -> Option<&TraceStep> {
        self.steps.get(self.best_step)
    }

    pub fn total_candidates(&self) -> usize {
        self.steps.iter().map(|s| s.candidates_evaluated).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TrialSet {
        // 1 trial, 3 channels, 4 samples; channel c holds 10c + t
        let samples = (0..3)
            .flat_map(|c| (0..4).map(move |t| (10 * c + t) as f32))
            .collect();
        let montage = Montage::new(vec!["A".into(), "B".into(), "C".into()], 100.0).unwrap();
        TrialSet::new(montage, 4, vec![1], samples).unwrap()
    }

    #[test]
    fn canonicalize_sorts_and_dedups() {
        let s = ChannelSubset::canonicalize(&[3, 1, 3], 4).unwrap();
        assert_eq!(s.indices(), &[1, 3]);
        assert_eq!(ChannelSubset::canonicalize(&[0], 1).unwrap().indices(), &[0]);
        assert_eq!(s, ChannelSubset::canonicalize(&[1, 3], 4).unwrap());
    }

    #[test]
    fn canonicalize_errors() {
        assert!(matches!(ChannelSubset::canonicalize(&[], 4), Err(Error::EmptySubset)));
        assert!(matches!(
            ChannelSubset::canonicalize(&[5], 4),
            Err(Error::IndexOutOfRange { index: 5, channels: 4 })
        ));
    }

    #[test]
    fn restrict_identity_and_selection() {
        let r = toy();
        assert_eq!(restrict(&r, &ChannelSubset::full(3).unwrap()).unwrap(), r);

        let sub = restrict(&r, &ChannelSubset::canonicalize(&[0, 2], 3).unwrap()).unwrap();
        assert_eq!(sub.samples(), &[0.0, 1.0, 2.0, 3.0, 20.0, 21.0, 22.0, 23.0]);
        assert_eq!(sub.montage().channel_names(), &["A", "C"]);
        assert_eq!(sub.labels(), r.labels());
    }

    #[test]
    fn restrict_composes() {
        // hand-computed: restricting {0,2} then {0,1} leaves channels A and C
        let r = toy();
        let once = restrict(&r, &ChannelSubset::canonicalize(&[0, 2], 3).unwrap()).unwrap();
        let twice = restrict(&once, &ChannelSubset::canonicalize(&[0, 1], 2).unwrap()).unwrap();
        assert_eq!(twice, once);
        assert_eq!(twice.samples(), &[0.0, 1.0, 2.0, 3.0, 20.0, 21.0, 22.0, 23.0]);
    }

    #[test]
    fn restrict_out_of_range() {
        let r = toy();
        let s = ChannelSubset::canonicalize(&[3], 4).unwrap();
        assert!(matches!(restrict(&r, &s), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn masks() {
        let s = ChannelSubset::canonicalize(&[1, 3], 4).unwrap();
        assert_eq!(mask_of(&s, 4).unwrap().bits(), &[false, true, false, true]);
        assert_eq!(
            mask_of(&ChannelSubset::full(3).unwrap(), 3).unwrap().bits(),
            &[true, true, true]
        );
        assert!(matches!(
            subset_of(&SubsetMask::from_bits(vec![false; 3])),
            Err(Error::AllZeroMask)
        ));
    }

    #[test]
    fn mask_round_trip_exhaustive_small() {
        for c in 1..=12usize {
            for bits in 1u32..(1 << c) {
                let idx: Vec<usize> = (0..c).filter(|i| bits >> i & 1 == 1).collect();
                let s = ChannelSubset::canonicalize(&idx, c).unwrap();
                assert_eq!(subset_of(&mask_of(&s, c).unwrap()).unwrap(), s);
            }
        }
    }

    #[test]
    fn trial_set_validation() {
        let m = Montage::numbered(1, 10.0).unwrap();
        assert!(TrialSet::new(m.clone(), 1, vec![1, 3], vec![0.0, 0.0]).is_err());
        assert!(TrialSet::new(m.clone(), 1, vec![0], vec![0.0]).is_err());
        assert!(matches!(
            TrialSet::new(m.clone(), 1, vec![1], vec![f32::NAN]),
            Err(Error::NonFiniteSample(0))
        ));
        assert_eq!(TrialSet::new(m, 1, vec![2, 1, 2], vec![0.0; 3]).unwrap().n_classes(), 2);
    }

    #[test]
    fn montage_validation() {
        assert!(Montage::new(vec![], 1.0).is_err());
        assert!(Montage::new(vec!["A".into(), "A".into()], 1.0).is_err());
        assert!(Montage::new(vec!["A".into()], 0.0).is_err());
        assert_eq!(Montage::bci_iv_2a().index_of("cz"), Some(9));
    }

    #[test]
    fn trace_best_step_ties_go_first() {
        let s = |i: usize| ChannelSubset::canonicalize(&[i], 4).unwrap();
        let steps = [0.5, 0.7, 0.7, 0.6]
            .iter()
            .enumerate()
            .map(|(i, &a)| TraceStep {
                subset: s(i),
                accuracy: a,
                candidates_evaluated: 1,
            })
            .collect();
        assert_eq!(SelectionTrace::new(Method::Greedy, steps).best_step, 1);
    }
}
