use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::stats::{median, KsResult, SummaryStats};
use crate::{Error, Result};

/// How a verdict compares its empirical value to the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|empirical − target| ≤ tolerance`
    Within,
    /// `empirical < target`
    Below,
    /// `empirical > target`
    Above,
}

/// One pass/fail decision, carrying every number needed to re-check it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub comparison: Comparison,
    pub empirical: f64,
    pub target: f64,
    /// Effective tolerance; unused by `below` and `above`.
    pub tolerance: f64,
    /// Standard error of `empirical`, when it entered the tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<f64>,
    /// How the tolerance was formed, e.g. `max(3*SE, 0.05)`.
    pub rule: String,
    pub passed: bool,
}

impl Verdict {
    pub fn within(
        name: impl Into<String>,
        empirical: f64,
        target: f64,
        tolerance: f64,
        standard_error: Option<f64>,
        rule: impl Into<String>,
    ) -> Self {
        let passed = (empirical - target).abs() <= tolerance;
        Verdict {
            name: name.into(),
            comparison: Comparison::Within,
            empirical,
            target,
            tolerance,
            standard_error,
            rule: rule.into(),
            passed,
        }
    }

    /// `|empirical − target| ≤ max(k·SE, floor)`.
    pub fn within_se(name: impl Into<String>, empirical: f64, target: f64, se: f64, k: f64, floor: f64) -> Self {
        let tol = (k * se).max(floor);
        Verdict::within(name, empirical, target, tol, Some(se), format!("max({k}*SE, {floor})"))
    }

    /// `|empirical − target| ≤ rel·|target|`.
    pub fn within_rel(name: impl Into<String>, empirical: f64, target: f64, rel: f64) -> Self {
        Verdict::within(name, empirical, target, rel * target.abs(), None, format!("{rel}*|target|"))
    }

    pub fn below(name: impl Into<String>, empirical: f64, target: f64, rule: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            comparison: Comparison::Below,
            empirical,
            target,
            tolerance: 0.0,
            standard_error: None,
            rule: rule.into(),
            passed: empirical < target,
        }
    }

    pub fn above(name: impl Into<String>, empirical: f64, target: f64, rule: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            comparison: Comparison::Above,
            empirical,
            target,
            tolerance: 0.0,
            standard_error: None,
            rule: rule.into(),
            passed: empirical > target,
        }
    }

    /// Re-evaluates the comparison from the stored numbers.
    pub fn recheck(&self) -> bool {
        match self.comparison {
            Comparison::Within => (self.empirical - self.target).abs() <= self.tolerance,
            Comparison::Below => self.empirical < self.target,
            Comparison::Above => self.empirical > self.target,
        }
    }
}

/// Summary of one tracked per-replica statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticReport {
    pub name: String,
    pub summary: SummaryStats,
    pub variance: f64,
    pub standard_error: f64,
    pub median: f64,
}

impl StatisticReport {
    pub fn from_values(name: impl Into<String>, values: &[f64]) -> Self {
        let summary = SummaryStats::from_slice(values);
        StatisticReport {
            name: name.into(),
            variance: summary.variance(),
            standard_error: summary.sem(),
            median: median(values),
            summary,
        }
    }
}

/// A KS test of a standardized statistic against `N(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub name: String,
    /// Theory mean and variance used to standardize.
    pub target_mean: f64,
    pub target_variance: f64,
    #[serde(flatten)]
    pub result: KsResult,
}

/// Full record of one experiment run. Wall time is kept out of the
/// serialized form so that reports are byte-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub replicas: usize,
    pub skipped: usize,
    pub statistics: Vec<StatisticReport>,
    pub verdicts: Vec<Verdict>,
    pub ks: Vec<KsReport>,
    pub passed: bool,
    #[serde(skip)]
    pub raw: Vec<RawRow>,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

/// One line of the per-replica CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub replica: usize,
    pub statistic: String,
    pub value: f64,
}

impl ExperimentReport {
    pub fn statistic(&self, name: &str) -> Option<&StatisticReport> {
        self.statistics.iter().find(|s| s.name == name)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn ks_result(&self, name: &str) -> Option<&KsReport> {
        self.ks.iter().find(|k| k.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("replica,statistic_name,value\n");
        for row in &self.raw {
            out.push_str(&format!("{},{},{}\n", row.replica, row.statistic, row.value));
        }
        out
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir` (created if needed),
    /// each through a temporary file renamed into place. Returns both paths.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json = dir.join(format!("{stem}.json"));
        let csv = dir.join(format!("{stem}.csv"));
        write_atomic(&json, self.to_json()?.as_bytes())?;
        write_atomic(&csv, self.to_csv().as_bytes())?;
        Ok((json, csv))
    }
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
