//! Named Monte Carlo experiments.
//!
//! Each experiment draws `replicas` independent matrices from per-replica
//! seeds, computes its statistics, and compares them with the theory targets
//! in a list of [`Verdict`]s. Results are folded in replica order, so a
//! report depends only on the config, never on the number of workers.

mod config;
mod outliers;
mod report;
mod resolvent;
mod runner;
mod steinitz;
mod testfn;
mod xi;

use std::time::Instant;

pub use config::{parse_override, ExperimentConfig, ExperimentKind, ProbeSpec, Tolerances};
pub use outliers::run_outlier_experiment;
pub use report::{write_atomic, Comparison, ExperimentReport, KsReport, RawRow, StatisticReport, Verdict};
pub use resolvent::run_resolvent_experiment;
pub use runner::{replica_seed, set_progress};
pub use steinitz::run_steinitz_demo;
pub use testfn::run_testfn_experiment;
pub use xi::run_xi_proxy_experiment;

use crate::deformation::{Frame, Spike, SpikeSpec};
use crate::ensemble::{sample_wigner, truncate_center, WignerSample};
use crate::stats::ks_statistic;
use crate::theory::outlier_location;
use crate::{Error, Result};
use runner::Table;

/// Runs the experiment named in `cfg`.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::Outliers => run_outlier_experiment(cfg),
        ExperimentKind::XiProxy => run_xi_proxy_experiment(cfg),
        ExperimentKind::Resolvent => run_resolvent_experiment(cfg),
        ExperimentKind::Testfn => run_testfn_experiment(cfg),
        ExperimentKind::SteinitzDemo => run_steinitz_demo(cfg),
    }
}

fn sample(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<WignerSample> {
    let x = sample_wigner(&cfg.law, n, cfg.beta.value(), seed)?;
    Ok(if cfg.truncate { truncate_center(&x) } else { x })
}

fn skip_near_singular<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NearSingularShift(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn probe_frame(cfg: &ExperimentConfig, n: usize) -> Result<Frame> {
    let spec = SpikeSpec::new(vec![Spike {
        theta: 1.0,
        mult: cfg.probes.count,
        frame: cfg.probes.frame.clone(),
    }])?;
    Ok(spec.build_frames(n)?.remove(0))
}

fn skip_verdict(cfg: &ExperimentConfig, table: &Table, label: &str) -> Verdict {
    let rate = table.skipped() as f64 / table.rows.len() as f64;
    Verdict::below(
        format!("skip rate{label}"),
        rate,
        cfg.tolerances.max_skip_rate,
        "rate < max_skip_rate",
    )
}

/// KS test of `(x − mean)/√variance` against `N(0,1)`, with its verdict.
fn ks_check(cfg: &ExperimentConfig, name: &str, values: &[f64], mean: f64, variance: f64) -> Result<(KsReport, Verdict)> {
    let z: Vec<f64> = values.iter().map(|x| (x - mean) / variance.sqrt()).collect();
    let result = ks_statistic(&z, 0.0, 1.0)?;
    let verdict = Verdict::above(format!("ks {name}"), result.p_value, cfg.tolerances.ks_alpha, "p > ks_alpha");
    Ok((
        KsReport {
            name: name.to_string(),
            target_mean: mean,
            target_variance: variance,
            result,
        },
        verdict,
    ))
}

/// The outliers of one super-critical spike.
#[derive(Debug, Clone)]
struct Cluster {
    /// Index of the spike in the spec.
    spike: usize,
    theta: f64,
    rho: f64,
    /// Positions in the ascending spectrum, listed from the largest eigenvalue down.
    positions: Vec<usize>,
}

/// Locates the outlier clusters in an ascending spectrum of length `n`:
/// positive spikes claim the top eigenvalues in decreasing `θ` order,
/// negative spikes the bottom ones.
fn clusters(spikes: &SpikeSpec, sigma: f64, n: usize) -> Result<Vec<Cluster>> {
    let mut out = Vec::new();
    let mut top = 0;
    for (j, s) in spikes.spikes().iter().enumerate() {
        if let (true, Some(rho)) = (s.theta > 0.0, outlier_location(s.theta, sigma)?) {
            out.push(Cluster {
                spike: j,
                theta: s.theta,
                rho,
                positions: (0..s.mult).map(|i| n - 1 - top - i).collect(),
            });
            top += s.mult;
        }
    }
    let mut bottom = 0;
    for (j, s) in spikes.spikes().iter().enumerate().rev() {
        if let (true, Some(rho)) = (s.theta < 0.0, outlier_location(s.theta, sigma)?) {
            out.push(Cluster {
                spike: j,
                theta: s.theta,
                rho,
                positions: (0..s.mult).map(|i| bottom + s.mult - 1 - i).collect(),
            });
            bottom += s.mult;
        }
    }
    if top + bottom > n {
        return Err(Error::InvalidDimension(format!(
            "{} outliers in a spectrum of size {n}",
            top + bottom
        )));
    }
    out.sort_by_key(|c| c.spike);
    if out.is_empty() {
        return Err(Error::NothingToMeasure);
    }
    Ok(out)
}

fn finish(cfg: &ExperimentConfig, tables: &[Table], verdicts: Vec<Verdict>, ks: Vec<KsReport>, start: Instant) -> ExperimentReport {
    let statistics = tables.iter().flat_map(Table::statistics).collect();
    let raw = tables.iter().flat_map(Table::raw_rows).collect();
    let replicas = tables.iter().map(|t| t.rows.len()).sum();
    let skipped = tables.iter().map(Table::skipped).sum();
    let passed = verdicts.iter().all(|v| v.passed);
    ExperimentReport {
        experiment: cfg.experiment.name().to_string(),
        config: cfg.clone(),
        replicas,
        skipped,
        statistics,
        verdicts,
        ks,
        passed,
        raw,
        wall_time_secs: start.elapsed().as_secs_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::FrameKind;

    fn spike(theta: f64, mult: usize) -> Spike {
        Spike {
            theta,
            mult,
            frame: FrameKind::RandomOrthogonal { seed: 1 },
        }
    }

    #[test]
    fn cluster_positions() {
        let spec = SpikeSpec::new(vec![spike(3.0, 2), spike(0.5, 1), spike(-2.0, 1), spike(-4.0, 2)]).unwrap();
        let cl = clusters(&spec, 1.0, 10).unwrap();
        let pos: Vec<(usize, Vec<usize>)> = cl.iter().map(|c| (c.spike, c.positions.clone())).collect();
        assert_eq!(pos, vec![(0, vec![9, 8]), (2, vec![2]), (3, vec![1, 0])]);
        assert!((cl[1].rho + 2.5).abs() < 1e-15);
    }

    #[test]
    fn subcritical_only_is_nothing_to_measure() {
        let spec = SpikeSpec::new(vec![spike(0.9, 1)]).unwrap();
        assert_eq!(clusters(&spec, 1.0, 10).unwrap_err(), Error::NothingToMeasure);
    }
}
