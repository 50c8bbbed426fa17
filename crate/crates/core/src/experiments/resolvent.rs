use std::time::Instant;

use super::runner::{replica_seed, run_replicas, Table};
use super::{finish, probe_frame, sample, skip_verdict, ExperimentConfig, ExperimentReport, Verdict};
use crate::ensemble::m3_quadform;
use crate::spectral::{eigh_projected, NEAR_SINGULAR};
use crate::stats::{covariance, covariance_se, SummaryStats};
use crate::theory::{gamma_covariance, resolvent_mean};
use crate::{Error, Result};

/// Fluctuations of resolvent bilinear forms `⟨uˡ, R(z) uᵖ⟩`.
///
/// One eigendecomposition per replica serves every probe pair `l ≤ p` and
/// every `z`. The statistic `G = √N(⟨uˡ, R(z) uᵖ⟩ − mean)` is centered by
/// the across-replica mean; its Re/Im covariances across all pairs of
/// `z` points are compared with `Γ`, and the mean itself with
/// `g δ_{lp} + g⁴(1/N)⟨uˡ, M₃ uᵖ⟩/√N`. A replica with a `z` closer than
/// `1e-8` to the spectrum is skipped.
pub fn run_resolvent_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let n = cfg.n;
    let sigma = cfg.law.sigma;
    let zs = cfg.z_points();
    if zs.is_empty() {
        return Err(Error::Config("the resolvent experiment needs at least one z point".into()));
    }
    if cfg.probes.count < 2 {
        return Err(Error::Config("the resolvent experiment needs at least two probe vectors".into()));
    }
    let frame = probe_frame(cfg, n)?;
    let probes = frame.columns();
    let m = probes.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|l| (l..m).map(move |p| (l, p))).collect();
    let key = |part: &str, (l, p): (usize, usize), a: usize| format!("{part}_l{}p{}_z{}", l + 1, p + 1, a + 1);

    let mut names = Vec::new();
    for &pair in &pairs {
        for a in 0..zs.len() {
            names.push(key("re", pair, a));
            names.push(key("im", pair, a));
        }
    }
    let rows = run_replicas(cfg.workers, cfg.replicas, "resolvent", |r| {
        let x = sample(cfg, n, replica_seed(cfg.master_seed, n, r))?;
        let proj = eigh_projected(&x.matrix, probes)?;
        if zs.iter().any(|&z| proj.distance_to_spectrum(z) < NEAR_SINGULAR) {
            return Ok(None);
        }
        let mut row = Vec::with_capacity(names.len());
        for &(l, p) in &pairs {
            for &z in &zs {
                let v = proj.resolvent(l, p, z)?;
                row.push(v.re);
                row.push(v.im);
            }
        }
        Ok(Some(row))
    })?;
    let table = Table::new(names, rows);

    let tol = &cfg.tolerances;
    let nf = n as f64;
    let mut verdicts = vec![skip_verdict(cfg, &table, "")];
    let profile = cfg.law.profile(cfg.beta);
    for &(l, p) in &pairs {
        let same = l == p;
        let tag = format!("l{}p{}", l + 1, p + 1);
        for a in 0..zs.len() {
            for b in a..zs.len() {
                let target = gamma_covariance(zs[a], zs[b], sigma, same, cfg.beta)?;
                for (i, pa) in ["re", "im"].iter().enumerate() {
                    for (j, pb) in ["re", "im"].iter().enumerate() {
                        let xa = table.column(&key(pa, (l, p), a));
                        let xb = table.column(&key(pb, (l, p), b));
                        verdicts.push(Verdict::within_se(
                            format!("cov_{pa}_{pb}_{tag}_z{}z{}", a + 1, b + 1),
                            nf * covariance(&xa, &xb),
                            target[i][j],
                            nf * covariance_se(&xa, &xb),
                            tol.mean_se_multiplier,
                            tol.cov_abs_tol,
                        ));
                    }
                }
            }
        }
        let m3 = m3_quadform(&profile, &probes[l], &probes[p])?;
        for (a, &z) in zs.iter().enumerate() {
            let want = resolvent_mean(z, sigma, same, m3, n)?;
            for (part, target) in [("re", want.re), ("im", want.im)] {
                let s = SummaryStats::from_slice(&table.column(&key(part, (l, p), a)));
                verdicts.push(Verdict::within_se(
                    format!("mean_{part}_{tag}_z{} vs centering", a + 1),
                    s.mean,
                    target,
                    s.sem(),
                    tol.mean_se_multiplier,
                    0.0,
                ));
            }
        }
    }
    Ok(finish(cfg, &[table], verdicts, Vec::new(), start))
}
