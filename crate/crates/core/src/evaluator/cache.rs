//! Subset-keyed memoization in front of any evaluator.
//!
//! Each key owns a slot guarded by its own mutex, so concurrent requests for
//! the same key wait on the first one instead of calling the backend twice.
//! Errors leave the slot empty.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::SubsetEvaluator;
use crate::error::Result;
use crate::model::{ChannelSubset, EvalResult};

pub const CACHE_DIR_ENV: &str = "CHANSEL_CACHE_DIR";
pub const CACHE_FILE: &str = "evals.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EvalCacheKey {
    pub evaluator_id: String,
    pub dataset_digest: String,
    pub subset: ChannelSubset,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct Record {
    key: EvalCacheKey,
    result: EvalResult,
}

type Slot = Arc<Mutex<Option<EvalResult>>>;

#[derive(Default)]
pub struct EvalCache {
    slots: Mutex<HashMap<EvalCacheKey, Slot>>,
    log: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

impl EvalCache {
    /// In-memory only.
    pub fn new() -> Self {
        EvalCache::default()
    }

    /// Loads `dir/evals.jsonl` if present and appends every new result to it.
    /// Unparseable lines (e.g. a torn final write) are skipped.
    pub fn persistent(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(CACHE_FILE);
        let mut slots = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(&path)?).lines() {
                let line = line?;
                if let Ok(rec) = serde_json::from_str::<Record>(&line) {
                    slots.insert(rec.key, Arc::new(Mutex::new(Some(rec.result))));
                } else if !line.trim().is_empty() {
                    log::warn!("skipping unreadable cache record in {}", path.display());
                }
            }
        }
        let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
        let len = file.metadata()?.len();
        if len > 0 && std::fs::read(&path)?.last() != Some(&b'\n') {
            file.write_all(b"\n")?;
        }
        Ok(EvalCache {
            slots: Mutex::new(slots),
            log: Some(Mutex::new(file)),
            path: Some(path),
        })
    }

    /// Persistent when `CHANSEL_CACHE_DIR` is set, in-memory otherwise.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) if !dir.is_empty() => EvalCache::persistent(Path::new(&dir)),
            _ => Ok(EvalCache::new()),
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        let slots = self.slots.lock().unwrap();
        slots.values().filter(|s| s.lock().unwrap().is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Returns the stored result, or runs `compute` once and stores it.
    /// The flag is true on a hit.
    pub fn get_or_eval<F>(&self, key: &EvalCacheKey, compute: F) -> Result<(EvalResult, bool)>
    where
        F: FnOnce() -> Result<EvalResult>,
    {
        let slot = {
            let mut slots = self.slots.lock().unwrap();
            Arc::clone(slots.entry(key.clone()).or_default())
        };
        let mut guard = slot.lock().unwrap();
        if let Some(hit) = guard.as_ref() {
            return Ok((hit.clone(), true));
        }
        let result = compute()?;
        self.append(key, &result)?;
        *guard = Some(result.clone());
        Ok((result, false))
    }

    fn append(&self, key: &EvalCacheKey, result: &EvalResult) -> Result<()> {
        if let Some(log) = &self.log {
            let rec = Record {
                key: key.clone(),
                result: result.clone(),
            };
            let mut line = serde_json::to_string(&rec).expect("cache record serializes");
            line.push('\n');
            let mut file = log.lock().unwrap();
            file.write_all(line.as_bytes())?;
            file.flush()?;
        }
        Ok(())
    }
}

/// A [`SubsetEvaluator`] that consults an [`EvalCache`] first and counts hits
/// and backend calls for this wrapper's lifetime.
pub struct CachedEvaluator<E> {
    inner: E,
    cache: Arc<EvalCache>,
    dataset_digest: String,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl<E: SubsetEvaluator> CachedEvaluator<E> {
    pub fn new(inner: E, cache: Arc<EvalCache>, dataset_digest: impl Into<String>) -> Self {
        CachedEvaluator {
            inner,
            cache,
            dataset_digest: dataset_digest.into(),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }

    /// Number of backend invocations that went through this wrapper.
    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::SeqCst)
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    pub fn key(&self, subset: &ChannelSubset, seed: u64) -> EvalCacheKey {
        EvalCacheKey {
            evaluator_id: self.inner.id(),
            dataset_digest: self.dataset_digest.clone(),
            subset: subset.clone(),
            seed,
        }
    }
}

impl<E: SubsetEvaluator> SubsetEvaluator for CachedEvaluator<E> {
    fn id(&self) -> String {
        self.inner.id()
    }

    fn evaluate(&self, subset: &ChannelSubset, seed: u64) -> Result<EvalResult> {
        let key = self.key(subset, seed);
        let (result, hit) = self.cache.get_or_eval(&key, || {
            self.misses.fetch_add(1, Ordering::SeqCst);
            self.inner.evaluate(subset, seed)
        })?;
        if hit {
            self.hits.fetch_add(1, Ordering::SeqCst);
        }
        Ok(result)
    }
}
