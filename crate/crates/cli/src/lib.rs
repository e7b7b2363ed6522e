//! The `chansel` command-line tool.
//!
//! Exit codes: 0 success, 2 invalid flags or input content, 3 I/O or dataset
//! format failure, 4 evaluator or protocol failure, 5 guard violation.

pub mod args;
pub mod report;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::Parser;

use chansel_core::dataio::{self, ets, SynthSpec};
use chansel_core::evaluator::{
    BuiltinEvalConfig, BuiltinEvaluator, CachedEvaluator, EvalCache, ExternalConfig, ExternalEvaluator,
    OracleEvaluator, OracleSpec,
};
use chansel_core::report::{curve_csv, eegnet_param_count, format_k, CountMode, EegnetArch};
use chansel_core::selectors::{
    accuracy_curve, exhaustive_search, greedy_forward_search, task_based_subset, weighted_random_search, Executor,
    RegionSpec, ScoreMode, WeightedRandomConfig,
};
use chansel_core::{ChannelSubset, Error, Method, SelectionTrace, SubsetEvaluator, TraceStep, TrialSet};

use args::*;
use report::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_EVAL: i32 = 4;
pub const EXIT_GUARD: i32 = 5;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let e = match self {
            CliError::Usage(_) => return EXIT_USAGE,
            CliError::Core(e) => e.root(),
        };
        if e.is_protocol() {
            return EXIT_EVAL;
        }
        match e {
            Error::TooManyChannels(..) => EXIT_GUARD,
            Error::Io(_)
            | Error::BadMagic
            | Error::HeaderParse(_)
            | Error::PayloadLengthMismatch { .. }
            | Error::NonFiniteSample(_)
            | Error::InvalidTrialSet(_) => EXIT_IO,
            Error::ClassTooSmall { .. } | Error::SingularCovariance | Error::DegenerateSampling(_) => EXIT_EVAL,
            _ => EXIT_USAGE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Convert(a) => cmd_convert(&a),
        Command::Select(a) => cmd_select(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Params(a) => cmd_params(&a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("chansel: {e}");
            e.exit_code()
        }
    }
}

/// Writes to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(Error::Io)?;
    tmp.write_all(bytes).map_err(Error::Io)?;
    tmp.as_file().sync_all().map_err(Error::Io)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn parse_indices(text: &str, n_channels: usize) -> CliResult<ChannelSubset> {
    let idx = text
        .split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| CliError::Usage(format!("bad channel index {t:?}"))))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(ChannelSubset::canonicalize(&idx, n_channels)?)
}

fn split_list(text: &str) -> Vec<String> {
    text.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

/// "all", indices, or channel names.
fn parse_channels(text: &str, trials: &TrialSet) -> CliResult<ChannelSubset> {
    let c = trials.n_channels();
    if text.trim().eq_ignore_ascii_case("all") {
        return Ok(ChannelSubset::full(c)?);
    }
    let items = split_list(text);
    if items.iter().all(|t| t.parse::<usize>().is_ok()) {
        return parse_indices(text, c);
    }
    let montage = trials.montage();
    let idx = items
        .iter()
        .map(|n| montage.index_of(n).ok_or_else(|| Error::UnknownName(n.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ChannelSubset::canonicalize(&idx, c)?)
}

fn parse_bands(text: &str) -> CliResult<Vec<(f64, f64)>> {
    split_list(text)
        .iter()
        .map(|band| {
            let bad = || CliError::Usage(format!("bad band {band:?} (expected LOW-HIGH)"));
            let (lo, hi) = band.split_once('-').ok_or_else(bad)?;
            Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn cmd_synth(a: &SynthArgs) -> CliResult<()> {
    let spec = SynthSpec {
        n_trials: a.trials,
        n_channels: a.channels,
        n_samples: a.samples,
        n_classes: a.classes,
        informative_channels: parse_indices(&a.informative, a.channels).map_err(|e| match e {
            CliError::Core(e) => CliError::Usage(format!("--informative: {e}")),
            u => u,
        })?,
        separation: a.separation,
        noise_sigma: a.noise,
        fs_hz: a.fs,
    };
    let trials = dataio::synth(&spec, a.seed)?;
    write_ets(&trials, &a.out)
}

fn write_ets(trials: &TrialSet, out: &Path) -> CliResult<()> {
    let bytes = ets::to_bytes(trials);
    write_atomic(out, &bytes)?;
    println!("{}", dataio::fingerprint(trials));
    Ok(())
}

fn cmd_convert(a: &ConvertArgs) -> CliResult<()> {
    let file = std::fs::File::open(&a.csv).map_err(Error::Io)?;
    let names = split_list(&a.names);
    let trials = dataio::import_csv(std::io::BufReader::new(file), a.fs, names)?;
    write_ets(&trials, &a.out)
}

type Backend = CachedEvaluator<Box<dyn SubsetEvaluator>>;

fn build_evaluator(
    a: &EvaluatorArgs,
    trials: &TrialSet,
    dataset: &Path,
    digest: &str,
    jobs: usize,
) -> CliResult<(Backend, ConfigEcho)> {
    let c = trials.n_channels();
    let mut echo = ConfigEcho {
        seed: a.seed,
        ..ConfigEcho::default()
    };
    let inner: Box<dyn SubsetEvaluator> = match a.evaluator {
        EvaluatorKind::Builtin => {
            let cfg = BuiltinEvalConfig {
                n_folds: a.folds,
                shrinkage_gamma: a.gamma,
                bands_hz: parse_bands(&a.bands)?,
                broadband_fallback: !a.no_broadband_fallback,
            };
            cfg.feature_mode(trials.montage().fs_hz())
                .map_err(|e| CliError::Usage(e.to_string()))?;
            echo.builtin = Some(BuiltinEcho {
                folds: cfg.n_folds,
                gamma: cfg.shrinkage_gamma,
                bands_hz: cfg.bands_hz.iter().map(|&(l, h)| [l, h]).collect(),
                broadband_fallback: cfg.broadband_fallback,
            });
            Box::new(BuiltinEvaluator::new(trials, cfg)?)
        }
        EvaluatorKind::Oracle => {
            let spec = OracleSpec {
                informative: parse_indices(&a.oracle_informative, c)?,
                base: a.oracle_base,
                gain: a.oracle_gain,
                penalty: a.oracle_penalty,
            };
            echo.oracle = Some(OracleEcho {
                informative: spec.informative.indices().to_vec(),
                base: spec.base,
                gain: spec.gain,
                penalty: spec.penalty,
            });
            Box::new(OracleEvaluator::new(spec, c).map_err(|e| CliError::Usage(e.to_string()))?)
        }
        EvaluatorKind::External => {
            let program = a
                .external
                .clone()
                .ok_or_else(|| CliError::Usage("--evaluator external needs --external PROGRAM".into()))?;
            if !(a.timeout_s.is_finite() && a.timeout_s > 0.0) {
                return Err(CliError::Usage(format!("bad --timeout-s {}", a.timeout_s)));
            }
            let mut command = vec![program];
            command.extend(a.external_args.iter().cloned());
            echo.external = Some(ExternalEcho {
                command: command.clone(),
                timeout_s: a.timeout_s,
            });
            let cfg = ExternalConfig {
                command,
                dataset: dataset.to_path_buf(),
                n_channels: c,
                timeout: Duration::from_secs_f64(a.timeout_s),
                pool_size: a.pool.unwrap_or(jobs).max(1),
            };
            Box::new(ExternalEvaluator::new(cfg).map_err(|e| match e {
                Error::Io(io) => Error::ProtocolMalformed(format!("cannot start external evaluator: {io}")),
                e => e,
            })?)
        }
    };
    let cache = Arc::new(EvalCache::from_env()?);
    Ok((CachedEvaluator::new(inner, cache, digest), echo))
}

fn load(dataset: &Path) -> CliResult<(TrialSet, String)> {
    let bytes = std::fs::read(dataset).map_err(Error::Io)?;
    let trials = dataio::read_ets(bytes.as_slice())?;
    let digest = dataio::fingerprint(&trials);
    Ok((trials, digest))
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    let (trials, digest) = load(&a.dataset)?;
    let subset = parse_channels(&a.channels, &trials)?;
    let (backend, _) = build_evaluator(&a.eval, &trials, &a.dataset, &digest, 1)?;
    let r = backend.evaluate(&subset, a.eval.seed)?;
    println!("{:.4}", r.accuracy);
    Ok(())
}

fn cmd_params(a: &ParamsArgs) -> CliResult<()> {
    let arch = EegnetArch {
        c: a.c,
        t: a.t,
        f1: a.f1,
        d: a.d,
        f2: a.f2,
        kern_len: a.kern_len,
        sep_kern: a.sep_kern,
        pool1: a.pool1,
        pool2: a.pool2,
        n_classes: a.classes,
        count_mode: match a.count_mode {
            CountModeArg::TrainableOnly => CountMode::TrainableOnly,
            CountModeArg::AllBatchnorm => CountMode::AllBatchnorm,
        },
    };
    let n = eegnet_param_count(&arch).map_err(|e| CliError::Usage(e.to_string()))?;
    println!("{n} {}", format_k(n));
    Ok(())
}

fn cmd_select(a: &SelectArgs) -> CliResult<()> {
    let started = Instant::now();
    let (trials, digest) = load(&a.dataset)?;
    let montage = trials.montage().clone();
    let c = trials.n_channels();
    let jobs = match a.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(j) => j,
        None => default_jobs(),
    };
    let exec = Executor::new(jobs)?;

    // Region selection needs no evaluator unless asked to score the result.
    let needs_evaluator = a.method != MethodArg::Task || a.evaluate;
    let (backend, mut echo) = if needs_evaluator {
        let (b, echo) = build_evaluator(&a.eval, &trials, &a.dataset, &digest, jobs)?;
        (Some(b), echo)
    } else {
        let echo = ConfigEcho {
            seed: a.eval.seed,
            ..ConfigEcho::default()
        };
        (None, echo)
    };
    let ev: Option<&dyn SubsetEvaluator> = backend.as_ref().map(|b| b as &dyn SubsetEvaluator);
    let seed = a.eval.seed;

    let mut scores = None;
    let (trace, selected): (SelectionTrace, Option<ChannelSubset>) = match a.method {
        MethodArg::Exhaustive => {
            let guard = (!a.allow_large).then_some(a.max_channels);
            echo.exhaustive = Some(ExhaustiveEcho { guard });
            let trace = exhaustive_search(ev.expect("evaluator"), c, seed, guard, &exec)?;
            let best = trace.best().map(|s| s.subset.clone());
            (trace, best)
        }
        MethodArg::Greedy => {
            let trace = greedy_forward_search(ev.expect("evaluator"), c, seed, &exec)?;
            let best = trace.best().map(|s| s.subset.clone());
            (trace, best)
        }
        MethodArg::Random => {
            let k = a.k.ok_or_else(|| CliError::Usage("--method random needs --k".into()))?;
            let cfg = WeightedRandomConfig {
                k,
                p_include: a.p_include,
                seed: a.sample_seed.unwrap_or(seed),
                target_size: (!a.no_target).then_some(a.target_size.min(c)),
                score_mode: match a.score_mode {
                    ScoreModeArg::RawSum => ScoreMode::RawSum,
                    ScoreModeArg::OccurrenceMean => ScoreMode::OccurrenceMean,
                },
            };
            cfg.validate(c)?;
            echo.random = Some(RandomEcho {
                k: cfg.k,
                p_include: cfg.p_include,
                sample_seed: cfg.seed,
                target_size: cfg.target_size,
                score_mode: match cfg.score_mode {
                    ScoreMode::RawSum => "raw_sum",
                    ScoreMode::OccurrenceMean => "occurrence_mean",
                }
                .into(),
            });
            let out = weighted_random_search(ev.expect("evaluator"), c, &cfg, seed, &exec)?;
            scores = Some(ScoresSection::new(&out.scores, &out.ranking, &montage));
            let selected = out
                .selected
                .clone()
                .or_else(|| out.trace.best().map(|s| s.subset.clone()));
            (out.trace, selected)
        }
        MethodArg::Task => {
            let region = RegionSpec {
                row_prefixes: split_list(&a.prefixes),
                explicit_names: a.names.as_deref().map(split_list),
            };
            echo.task = Some(TaskEcho {
                prefixes: region.row_prefixes.clone(),
                names: region.explicit_names.clone(),
                evaluated: a.evaluate,
            });
            let subset = task_based_subset(&montage, &region)?;
            let steps = match ev {
                Some(ev) => {
                    let r = ev.evaluate(&subset, seed)?;
                    vec![TraceStep {
                        subset: r.subset,
                        accuracy: r.accuracy,
                        candidates_evaluated: 1,
                    }]
                }
                None => vec![],
            };
            (SelectionTrace::new(Method::TaskBased, steps), Some(subset))
        }
    };

    let curve = if trace.steps.is_empty() { vec![] } else { accuracy_curve(&trace) };
    let selected_accuracy = selected.as_ref().and_then(|s| {
        trace
            .steps
            .iter()
            .rev()
            .find(|step| &step.subset == s)
            .map(|step| step.accuracy)
    });
    let (hits, misses) = backend
        .as_ref()
        .map_or((0, 0), |b| (b.hits(), b.misses()));
    let method = match a.method {
        MethodArg::Exhaustive => Method::Exhaustive,
        MethodArg::Greedy => Method::Greedy,
        MethodArg::Random => Method::WeightedRandom,
        MethodArg::Task => Method::TaskBased,
    };
    let report = RunReport {
        run: RunSection {
            method: method.to_string(),
            dataset_digest: digest,
            n_channels: c,
            n_trials: trials.n_trials(),
            evaluator: backend.as_ref().map_or_else(|| "none".into(), |b| b.id()),
            accuracy: ACCURACY_CONVENTION,
            total_evaluations: hits + misses,
            backend_calls: misses,
            cache_hits: hits,
            best_step: trace.best().map(|_| trace.best_step + 1),
            wall_time_ms: started.elapsed().as_millis() as u64,
        },
        config: echo,
        selected: selected.as_ref().map(|s| SubsetEntry::new(s, &montage, selected_accuracy)),
        scores,
        trace: trace_entries(&trace, &montage),
        curve: curve_entries(&curve, &montage),
    };

    if let Some(path) = &a.out {
        let text = toml::to_string(&report).map_err(|e| CliError::Usage(format!("cannot encode report: {e}")))?;
        write_atomic(path, text.as_bytes())?;
    }
    if let Some(path) = &a.curve {
        write_atomic(path, curve_csv(&curve, &montage).as_bytes())?;
    }
    if let Some(s) = &selected {
        println!("{}", montage.names_of(s).join(","));
    }
    Ok(())
}
