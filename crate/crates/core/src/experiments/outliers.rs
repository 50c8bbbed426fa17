use std::time::Instant;

use super::runner::{replica_seed, run_replicas, Table};
use super::{clusters, finish, ks_check, sample, Cluster, ExperimentConfig, ExperimentReport, Verdict};
use crate::deformation::{Frame, FrameKind};
use crate::ensemble::{m3_quadform, LawKind};
use crate::spectral::{deformed_matrix, eigvalsh};
use crate::stats::SummaryStats;
use crate::theory::{c_theta, case_a_trace_variance, case_b_limit};
use crate::Result;

/// Limit-law targets for one cluster statistic: `s` itself when `k = 1`,
/// the cluster average of `s` otherwise.
struct Target {
    mean: f64,
    variance: f64,
    gaussian: bool,
}

fn target(cfg: &ExperimentConfig, cl: &Cluster, frame: &Frame) -> Result<Target> {
    let sigma = cfg.law.sigma;
    let k = frame.k();
    let profile = cfg.law.profile(cfg.beta);
    match &cfg.spikes.spikes()[cl.spike].frame {
        FrameKind::Canonical { coeffs } => {
            let cols = frame.columns();
            let mut shift = 0.0;
            for c in cols {
                shift += m3_quadform(&profile, c, c)? / (cl.theta * cl.theta);
            }
            let diag_variance = if cfg.truncate { 0.0 } else { cfg.law.diag_sigma.powi(2) };
            let support = coeffs.first().map_or(0, Vec::len);
            let u: Vec<Vec<f64>> = cols.iter().map(|c| c[..support].to_vec()).collect();
            Ok(Target {
                mean: shift / k as f64,
                variance: case_a_trace_variance(cl.theta, sigma, cfg.beta, profile.fourth_moment, diag_variance, &u)?,
                gaussian: matches!(cfg.law.kind, LawKind::Gaussian),
            })
        }
        _ => {
            let lim = case_b_limit(cl.theta, sigma, cfg.beta, frame, &profile, cfg.n)?;
            let trace: f64 = (0..k).map(|l| lim.shift(l, l)).sum();
            Ok(Target {
                mean: trace / k as f64,
                variance: lim.diagonal_variance() / k as f64,
                gaussian: true,
            })
        }
    }
}

/// Outlier locations and fluctuations of `X_N + A_N`.
///
/// Per replica and super-critical spike `j` it records every outlier
/// `λ_{j,i}` and `s_{j,i} = c_θ√N(λ_{j,i} − ρ_θ)`; clusters with `k_j ≥ 2`
/// also get their averages and successive gaps. Verdicts compare the mean
/// outlier (cluster average) with `ρ_θ` and the mean and variance of `s`
/// (cluster average) with the Case A or Case B limit, plus a KS test when
/// that limit is Gaussian.
pub fn run_outlier_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let n = cfg.n;
    let sigma = cfg.law.sigma;
    let cls = clusters(&cfg.spikes, sigma, n)?;
    let frames = cfg.spikes.build_frames(n)?;
    let root = (n as f64).sqrt();

    let mut names = Vec::new();
    for cl in &cls {
        let j = cl.spike + 1;
        let k = cl.positions.len();
        for i in 1..=k {
            names.push(format!("lambda_j{j}_i{i}"));
            names.push(format!("s_j{j}_i{i}"));
        }
        if k > 1 {
            names.push(format!("lambda_j{j}_avg"));
            names.push(format!("s_j{j}_avg"));
            for i in 1..k {
                names.push(format!("gap_j{j}_i{i}"));
            }
        }
    }
    let scales: Vec<f64> = cls.iter().map(|cl| c_theta(cl.theta, sigma)).collect::<Result<_>>()?;

    let rows = run_replicas(cfg.workers, cfg.replicas, "outliers", |r| {
        let x = sample(cfg, n, replica_seed(cfg.master_seed, n, r))?;
        let m = deformed_matrix(&x.matrix, &cfg.spikes, &frames)?;
        let ev = eigvalsh(&m)?;
        let mut row = Vec::with_capacity(names.len());
        for (cl, &c) in cls.iter().zip(&scales) {
            let lam: Vec<f64> = cl.positions.iter().map(|&p| ev[p]).collect();
            let s: Vec<f64> = lam.iter().map(|l| c * root * (l - cl.rho)).collect();
            for (l, si) in lam.iter().zip(&s) {
                row.push(*l);
                row.push(*si);
            }
            let k = lam.len();
            if k > 1 {
                row.push(lam.iter().sum::<f64>() / k as f64);
                row.push(s.iter().sum::<f64>() / k as f64);
                for i in 1..k {
                    row.push(s[i - 1] - s[i]);
                }
            }
        }
        Ok(Some(row))
    })?;
    let table = Table::new(names, rows);

    let tol = &cfg.tolerances;
    let mut verdicts = Vec::new();
    let mut ks = Vec::new();
    for cl in &cls {
        let j = cl.spike + 1;
        let suffix = if cl.positions.len() > 1 { "avg" } else { "i1" };
        let lam = SummaryStats::from_slice(&table.column(&format!("lambda_j{j}_{suffix}")));
        verdicts.push(Verdict::within(
            format!("mean lambda_j{j}_{suffix} vs rho"),
            lam.mean,
            cl.rho,
            tol.lambda_abs_tol,
            Some(lam.sem()),
            "lambda_abs_tol",
        ));
        let s_name = format!("s_j{j}_{suffix}");
        let s_vals = table.column(&s_name);
        let s = SummaryStats::from_slice(&s_vals);
        let t = target(cfg, cl, &frames[cl.spike])?;
        verdicts.push(Verdict::within_se(
            format!("mean {s_name} vs shift"),
            s.mean,
            t.mean,
            s.sem(),
            tol.mean_se_multiplier,
            0.0,
        ));
        verdicts.push(Verdict::within_rel(
            format!("var {s_name} vs limit"),
            s.variance(),
            t.variance,
            tol.variance_rel_tol,
        ));
        if t.gaussian && s_vals.len() >= 20 {
            let (report, verdict) = ks_check(cfg, &s_name, &s_vals, t.mean, t.variance)?;
            ks.push(report);
            verdicts.push(verdict);
        }
    }
    Ok(finish(cfg, &[table], verdicts, ks, start))
}
