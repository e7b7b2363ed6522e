use serde::Serialize;

use chansel_core::selectors::CurvePoint;
use chansel_core::{ChannelSubset, Montage, ScoreVector, SelectionTrace};

pub const ACCURACY_CONVENTION: &str = "fraction of trials in [0, 1]";

/// Everything a `select` run produced, in a diff-friendly TOML layout.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub run: RunSection,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected: Option<SubsetEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<ScoresSection>,
    pub trace: Vec<StepEntry>,
    pub curve: Vec<CurveEntry>,
}

#[derive(Debug, Serialize)]
pub struct RunSection {
    pub method: String,
    pub dataset_digest: String,
    pub n_channels: usize,
    pub n_trials: usize,
    pub evaluator: String,
    pub accuracy: &'static str,
    pub total_evaluations: usize,
    pub backend_calls: usize,
    pub cache_hits: usize,
    pub best_step: Option<usize>,
    pub wall_time_ms: u64,
}

#[derive(Debug, Default, Serialize)]
pub struct ConfigEcho {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<BuiltinEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub external: Option<ExternalEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhaustive: Option<ExhaustiveEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskEcho>,
}

#[derive(Debug, Serialize)]
pub struct BuiltinEcho {
    pub folds: usize,
    pub gamma: f64,
    pub bands_hz: Vec<[f64; 2]>,
    pub broadband_fallback: bool,
}

#[derive(Debug, Serialize)]
pub struct OracleEcho {
    pub informative: Vec<usize>,
    pub base: f64,
    pub gain: f64,
    pub penalty: f64,
}

#[derive(Debug, Serialize)]
pub struct ExternalEcho {
    pub command: Vec<String>,
    pub timeout_s: f64,
}

#[derive(Debug, Serialize)]
pub struct ExhaustiveEcho {
    pub guard: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct RandomEcho {
    pub k: usize,
    pub p_include: f64,
    pub sample_seed: u64,
    pub target_size: Option<usize>,
    pub score_mode: String,
}

#[derive(Debug, Serialize)]
pub struct TaskEcho {
    pub prefixes: Vec<String>,
    pub names: Option<Vec<String>>,
    pub evaluated: bool,
}

#[derive(Debug, Serialize)]
pub struct SubsetEntry {
    pub size: usize,
    pub indices: Vec<usize>,
    pub names: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

impl SubsetEntry {
    pub fn new(subset: &ChannelSubset, montage: &Montage, accuracy: Option<f64>) -> Self {
        SubsetEntry {
            size: subset.len(),
            indices: subset.indices().to_vec(),
            names: montage.names_of(subset),
            accuracy,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ScoresSection {
    pub k_subsets: usize,
    pub values: Vec<f64>,
    pub ranking: Vec<usize>,
    pub ranking_names: Vec<String>,
}

impl ScoresSection {
    pub fn new(scores: &ScoreVector, ranking: &[usize], montage: &Montage) -> Self {
        ScoresSection {
            k_subsets: scores.k_subsets,
            values: scores.scores.clone(),
            ranking: ranking.to_vec(),
            ranking_names: ranking.iter().map(|&i| montage.channel_names()[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct StepEntry {
    pub step: usize,
    pub size: usize,
    pub accuracy: f64,
    pub candidates: usize,
    pub indices: Vec<usize>,
    pub names: Vec<String>,
}

pub fn trace_entries(trace: &SelectionTrace, montage: &Montage) -> Vec<StepEntry> {
    trace
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| StepEntry {
            step: i + 1,
            size: s.subset.len(),
            accuracy: s.accuracy,
            candidates: s.candidates_evaluated,
            indices: s.subset.indices().to_vec(),
            names: montage.names_of(&s.subset),
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct CurveEntry {
    pub size: usize,
    pub accuracy: f64,
    pub names: Vec<String>,
}

pub fn curve_entries(curve: &[CurvePoint], montage: &Montage) -> Vec<CurveEntry> {
    curve
        .iter()
        .map(|p| CurveEntry {
            size: p.size,
            accuracy: p.accuracy,
            names: montage.names_of(&p.subset),
        })
        .collect()
}

/// Blanks every `wall_time_ms` value so two reports can be compared byte for byte.
pub fn mask_wall_time(report: &str) -> String {
    report
        .lines()
        .map(|line| {
            if line.trim_start().starts_with("wall_time_ms") {
                "wall_time_ms = 0"
            } else {
                line
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}
