use std::time::Instant;

use super::runner::{replica_seed, run_replicas, Table};
use super::{finish, ExperimentConfig, ExperimentReport, Verdict};
use crate::deformation::{prefix_bound, steinitz_permute, zero_sum_family, FrameKind, Spike, SpikeSpec};
use crate::{Complex64, Result};

/// Steinitz rearrangement of the zero-sum family attached to `probes.count`
/// orthonormal vectors, one family per replica.
///
/// Random-orthogonal probes are redrawn per replica from the replica seed.
/// Records the attained prefix bound, `max|uᵢˡ|`, the ratio of the two
/// scaled by the constant `K`, and whether the output was a bijection.
pub fn run_steinitz_demo(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let n = cfg.n;
    let names = ["achieved", "max_entry", "constant", "ratio", "bijective"]
        .map(String::from)
        .to_vec();
    let rows = run_replicas(cfg.workers, cfg.replicas, "steinitz-demo", |r| {
        let frame = match cfg.probes.frame {
            FrameKind::RandomOrthogonal { .. } => FrameKind::RandomOrthogonal {
                seed: replica_seed(cfg.master_seed, n, r),
            },
            ref other => other.clone(),
        };
        let spec = SpikeSpec::new(vec![Spike {
            theta: 1.0,
            mult: cfg.probes.count,
            frame,
        }])?;
        let cols: Vec<Vec<Complex64>> = spec.build_frames(n)?[0]
            .columns()
            .iter()
            .map(|c| c.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        let max_u = cols.iter().flatten().fold(0.0f64, |m, z| m.max(z.norm()));
        let family = zero_sum_family(&cols)?;
        let c = family.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        let out = steinitz_permute(&family, c)?;
        let mut seen = vec![false; n];
        let bijective = out.permutation.len() == n && out.permutation.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true));
        let achieved = prefix_bound(&family, &out.permutation);
        let ratio = achieved / (out.constant * max_u);
        Ok(Some(vec![achieved, max_u, out.constant, ratio, if bijective { 1.0 } else { 0.0 }]))
    })?;
    let table = Table::new(names, rows);
    let worst = table.column("ratio").into_iter().fold(0.0, f64::max);
    let bad = table.column("bijective").iter().filter(|&&b| b != 1.0).count();
    let verdicts = vec![
        Verdict::within("largest achieved / (K max|u|)", worst, 0.5, 0.5, None, "ratio in [0, 1]"),
        Verdict::within("non-bijective outputs", bad as f64, 0.0, 0.0, None, "exact"),
    ];
    Ok(finish(cfg, &[table], verdicts, Vec::new(), start))
}
