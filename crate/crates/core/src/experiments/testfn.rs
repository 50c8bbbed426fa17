use std::time::Instant;

use super::runner::{replica_seed, run_replicas, Table};
use super::{finish, ks_check, probe_frame, sample, ExperimentConfig, ExperimentReport, Verdict};
use crate::ensemble::m3_quadform;
use crate::spectral::{eigh_projected, Beta};
use crate::stats::SummaryStats;
use crate::theory::{refine, testfn_mean, testfn_variance};
use crate::{Error, Result};

/// Variances below this count as the degenerate zero target.
const ZERO_VARIANCE: f64 = 1e-10;

/// Fluctuations of `⟨uˡ, f(X_N) uᵖ⟩` for each configured test function.
///
/// `f` is applied to the eigenvalues of one decomposition per replica. For
/// each pair `l ≤ p` the variance of `Y = √N(⟨uˡ, f(X)uᵖ⟩ − mean)` (real
/// part; the imaginary part too when `β = 2` and `l ≠ p`) is compared with
/// the semicircle double integral, and the mean with
/// `δ_{lp}∫f dμ_sc + N^{-1/2}(1/N)⟨uˡ, M₃ uᵖ⟩∫f(x)(x³σ⁻⁶ − 2xσ⁻⁴)dμ_sc`.
pub fn run_testfn_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let n = cfg.n;
    let sigma = cfg.law.sigma;
    if cfg.test_functions.is_empty() {
        return Err(Error::Config("the testfn experiment needs at least one test function".into()));
    }
    let frame = probe_frame(cfg, n)?;
    let probes = frame.columns();
    let m = probes.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|l| (l..m).map(move |p| (l, p))).collect();
    let complex = |(l, p): (usize, usize)| cfg.beta == Beta::Complex && l != p;
    let key = |part: &str, fi: usize, (l, p): (usize, usize)| format!("f{}_{part}_l{}p{}", fi + 1, l + 1, p + 1);

    let mut names = Vec::new();
    for fi in 0..cfg.test_functions.len() {
        for &pair in &pairs {
            names.push(key("re", fi, pair));
            if complex(pair) {
                names.push(key("im", fi, pair));
            }
        }
    }
    let rows = run_replicas(cfg.workers, cfg.replicas, "testfn", |r| {
        let x = sample(cfg, n, replica_seed(cfg.master_seed, n, r))?;
        let proj = eigh_projected(&x.matrix, probes)?;
        let mut row = Vec::with_capacity(names.len());
        for f in &cfg.test_functions {
            for &(l, p) in &pairs {
                let v = proj.apply_fn(l, p, |t| f.eval(t));
                row.push(v.re);
                if complex((l, p)) {
                    row.push(v.im);
                }
            }
        }
        Ok(Some(row))
    })?;
    let table = Table::new(names, rows);

    let tol = &cfg.tolerances;
    let nf = n as f64;
    let profile = cfg.law.profile(cfg.beta);
    let mut verdicts = Vec::new();
    let mut ks = Vec::new();
    for (fi, f) in cfg.test_functions.iter().enumerate() {
        let label = f.label();
        for &(l, p) in &pairs {
            let same = l == p;
            let var_target = refine(sigma, |rule| testfn_variance(|t| f.eval(t), cfg.beta, same, rule))?;
            let m3 = m3_quadform(&profile, &probes[l], &probes[p])?;
            let mean_target = refine(sigma, |rule| testfn_mean(|t| f.eval(t), m3, n, same, rule))?;
            let parts: &[(&str, f64)] = if complex((l, p)) {
                &[("re", mean_target), ("im", 0.0)]
            } else {
                &[("re", mean_target)]
            };
            for &(part, mean) in parts {
                let name = key(part, fi, (l, p));
                let vals = table.column(&name);
                let s = SummaryStats::from_slice(&vals);
                let var = nf * s.variance();
                verdicts.push(if var_target < ZERO_VARIANCE {
                    Verdict::within(format!("var Y {name} ({label})"), var, 0.0, ZERO_VARIANCE, None, "zero target")
                } else {
                    Verdict::within_rel(format!("var Y {name} ({label})"), var, var_target, tol.variance_rel_tol)
                });
                verdicts.push(Verdict::within_se(
                    format!("mean {name} ({label})"),
                    s.mean,
                    mean,
                    s.sem(),
                    tol.mean_se_multiplier,
                    ZERO_VARIANCE,
                ));
                if var_target >= ZERO_VARIANCE && vals.len() >= 20 {
                    let ys: Vec<f64> = vals.iter().map(|v| nf.sqrt() * v).collect();
                    let (report, verdict) = ks_check(cfg, &name, &ys, nf.sqrt() * mean, var_target)?;
                    ks.push(report);
                    verdicts.push(verdict);
                }
            }
        }
    }
    Ok(finish(cfg, &[table], verdicts, ks, start))
}
