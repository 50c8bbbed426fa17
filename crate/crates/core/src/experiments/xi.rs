use std::time::Instant;

use super::runner::{replica_seed, run_replicas, Table};
use super::{clusters, finish, sample, skip_near_singular, skip_verdict, ExperimentConfig, ExperimentReport, Verdict};
use crate::spectral::{deformed_matrix, eigh_projected, eigvalsh, xi_from_projection};
use crate::stats::median;
use crate::Result;

/// Largest `|√N(λᵢ − ρ) − (θ² − σ²)yᵢ|` over the outliers of the first
/// super-critical spike, where `y₁ ≥ … ≥ y_k` are the eigenvalues of `Ξ`
/// built from `X_N` alone.
pub fn run_xi_proxy_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let sigma = cfg.law.sigma;
    let mut tables = Vec::new();
    let mut verdicts = Vec::new();
    let mut medians: Vec<(usize, f64)> = Vec::new();
    for n in cfg.ladder() {
        let cl = clusters(&cfg.spikes, sigma, n)?.remove(0);
        let frames = cfg.spikes.build_frames(n)?;
        let probes = frames[cl.spike].columns();
        let root = (n as f64).sqrt();
        let slope = cl.theta * cl.theta - sigma * sigma;
        let rows = run_replicas(cfg.workers, cfg.replicas, &format!("xi-proxy n={n}"), |r| {
            let x = sample(cfg, n, replica_seed(cfg.master_seed, n, r))?;
            let Some(proj) = skip_near_singular(eigh_projected(&x.matrix, probes).and_then(|p| xi_from_projection(&p, cl.theta, sigma)))?
            else {
                return Ok(None);
            };
            let y = proj.eigenvalues_desc()?;
            let ev = eigvalsh(&deformed_matrix(&x.matrix, &cfg.spikes, &frames)?)?;
            let resid = cl
                .positions
                .iter()
                .zip(&y)
                .map(|(&p, yi)| (root * (ev[p] - cl.rho) - slope * yi).abs())
                .fold(0.0, f64::max);
            Ok(Some(vec![resid]))
        })?;
        let table = Table::new(vec![format!("residual_n{n}")], rows);
        verdicts.push(skip_verdict(cfg, &table, &format!(" n={n}")));
        medians.push((n, median(&table.column(&format!("residual_n{n}")))));
        tables.push(table);
    }
    for w in medians.windows(2) {
        let ((a, ma), (b, mb)) = (w[0], w[1]);
        verdicts.push(Verdict::below(
            format!("median residual_n{b} below residual_n{a}"),
            mb,
            ma,
            "strict decrease",
        ));
    }
    Ok(finish(cfg, &tables, verdicts, Vec::new(), start))
}
