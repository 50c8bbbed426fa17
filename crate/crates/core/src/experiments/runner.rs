use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rayon::prelude::*;

use super::report::{RawRow, StatisticReport};
use crate::rng::derive_key;
use crate::{Error, Result};

static PROGRESS: AtomicBool = AtomicBool::new(false);

/// Turns the stderr replica counter on or off.
pub fn set_progress(on: bool) {
    PROGRESS.store(on, Ordering::Relaxed);
}

/// Seed of replica `index` at matrix size `n`.
pub fn replica_seed(master_seed: u64, n: usize, index: usize) -> u64 {
    derive_key(&[master_seed, n as u64, index as u64])
}

/// Runs `f(0), …, f(count−1)` on `workers` threads and returns the results
/// in index order. `Ok(None)` marks a skipped replica; the first error by
/// index wins.
pub(crate) fn run_replicas<T, F>(workers: usize, count: usize, label: &str, f: F) -> Result<Vec<Option<T>>>
where
    T: Send,
    F: Fn(usize) -> Result<Option<T>> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    let done = AtomicUsize::new(0);
    let progress = PROGRESS.load(Ordering::Relaxed);
    let step = (count / 20).max(1);
    let results: Vec<Result<Option<T>>> = pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let r = f(i);
                let d = done.fetch_add(1, Ordering::Relaxed) + 1;
                if progress && (d.is_multiple_of(step) || d == count) {
                    eprintln!("{label}: replica {d}/{count}");
                }
                r
            })
            .collect()
    });
    results.into_iter().collect()
}

/// Per-replica values of a fixed list of statistics.
#[derive(Debug, Clone)]
pub(crate) struct Table {
    pub names: Vec<String>,
    pub rows: Vec<Option<Vec<f64>>>,
}

impl Table {
    pub fn new(names: Vec<String>, rows: Vec<Option<Vec<f64>>>) -> Self {
        debug_assert!(rows.iter().flatten().all(|r| r.len() == names.len()));
        Table { names, rows }
    }

    pub fn skipped(&self) -> usize {
        self.rows.iter().filter(|r| r.is_none()).count()
    }

    pub fn index(&self, name: &str) -> usize {
        self.names
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("unknown statistic {name}"))
    }

    /// Values of one statistic over the kept replicas.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let i = self.index(name);
        self.rows.iter().flatten().map(|r| r[i]).collect()
    }

    pub fn statistics(&self) -> Vec<StatisticReport> {
        self.names
            .iter()
            .map(|n| StatisticReport::from_values(n.clone(), &self.column(n)))
            .collect()
    }

    pub fn raw_rows(&self) -> Vec<RawRow> {
        let mut out = Vec::new();
        for (replica, row) in self.rows.iter().enumerate() {
            if let Some(row) = row {
                for (name, &value) in self.names.iter().zip(row) {
                    out.push(RawRow {
                        replica,
                        statistic: name.clone(),
                        value,
                    });
                }
            }
        }
        out
    }
}
