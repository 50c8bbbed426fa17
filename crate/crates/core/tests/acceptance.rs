//! Acceptance criteria 1–11, run in order. Each prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::json;
use spiked_wigner::experiments::{run, ExperimentConfig, ExperimentKind, ExperimentReport};
use spiked_wigner::rng::Stream;
use spiked_wigner::spectral::{eigh, eigvalsh, Beta, DenseHermitian};
use spiked_wigner::stats::{ks_statistic, SummaryStats};
use spiked_wigner::theory::{neg_inv_gprime, outlier_location, pi_cov, semicircle_quadrature, stieltjes_g, variance_kernel};
use spiked_wigner::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn experiment(kind: ExperimentKind, layer: serde_json::Value) -> ExperimentReport {
    let mut cfg = ExperimentConfig::from_layers(kind, Some(layer), &[]).unwrap();
    cfg.workers = workers();
    run(&cfg).unwrap()
}

fn raw(rep: &ExperimentReport, name: &str) -> Vec<f64> {
    rep.raw.iter().filter(|r| r.statistic == name).map(|r| r.value).collect()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn analytic_identities() -> Outcome {
    let start = Instant::now();
    let mut worst_quad = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let sigma = 0.5 + 0.25 * (i % 4) as f64;
            let z = c(
                -6.0 + 1.3 * i as f64,
                if j < 5 {
                    0.05 + 0.6 * j as f64
                } else {
                    -0.05 - 0.6 * (j - 5) as f64
                },
            );
            let g = stieltjes_g(z, sigma).unwrap().g;
            worst_quad = worst_quad.max((sigma * sigma * g * g - z * g + 1.0).norm());
        }
    }
    let (mut worst_g, mut worst_gp, mut worst_pi, mut worst_kernel) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for sigma in [0.5, 1.0, 1.7] {
        for ratio in [1.1, 1.5, 2.0, 3.0, 5.0] {
            for sign in [1.0, -1.0] {
                let theta = sign * ratio * sigma;
                let rho = outlier_location(theta, sigma).unwrap().unwrap();
                let z = c(rho, 0.0);
                let (t2, s2) = (theta * theta, sigma * sigma);
                worst_g = worst_g.max((stieltjes_g(z, sigma).unwrap().g - 1.0 / theta).norm());
                worst_gp = worst_gp.max((neg_inv_gprime(theta, sigma).unwrap() - (t2 - s2)).abs());
                worst_pi = worst_pi.max((pi_cov(z, z, sigma).unwrap() - s2 / (t2 * (t2 - s2))).norm());
                worst_kernel = worst_kernel.max((variance_kernel(z, z, sigma).unwrap() - s2 / (t2 - s2)).norm());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_quad <= 1e-12 && worst_g <= 1e-12 && worst_gp <= 1e-12 && worst_pi <= 1e-12 && worst_kernel <= 1e-12 && secs < 1.0;
    outcome(
        pass,
        format!(
            "quadratic residual {worst_quad:.1e}, g(rho)-1/theta {worst_g:.1e}, -1/g'-(theta^2-sigma^2) {worst_gp:.1e}, Pi {worst_pi:.1e}, kernel {worst_kernel:.1e}, {secs:.3} s"
        ),
    )
}

fn random_hermitian(n: usize, beta: Beta, rng: &mut Stream) -> DenseHermitian {
    let mut m = DenseHermitian::zeros(n, beta);
    for i in 0..n {
        for j in i..n {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = if beta == Beta::Complex && i != j {
                StandardNormal.sample(rng)
            } else {
                0.0
            };
            m.set(i, j, c(re, im));
        }
    }
    m
}

fn cubic_oracle(a: [[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = a;
    for (i, row) in b.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = (*x - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [lo, 3.0 * q - hi - lo, hi]
}

fn eigensolver_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = Stream::new(2024);
    let (mut worst_res, mut worst_gram) = (0.0f64, 0.0f64);
    for t in 0..100 {
        let n = 2 + (t * 198) / 99;
        let beta = if t % 2 == 0 { Beta::Real } else { Beta::Complex };
        let a = random_hermitian(n, beta, &mut rng);
        let e = eigh(&a, true).unwrap();
        let norm = e.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let vecs: Vec<Vec<Complex64>> = (0..n).map(|k| e.vector(k).unwrap()).collect();
        for (k, v) in vecs.iter().enumerate() {
            let av = a.matvec(v).unwrap();
            let r = av
                .iter()
                .zip(v)
                .map(|(x, y)| (x - y * e.values()[k]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst_res = worst_res.max(r / norm);
        }
        for i in 0..n {
            for j in i..n {
                let d: Complex64 = vecs[i].iter().zip(&vecs[j]).map(|(x, y)| x.conj() * y).sum();
                worst_gram = worst_gram.max((d - if i == j { 1.0 } else { 0.0 }).norm());
            }
        }
    }
    let mut worst_cubic = 0.0f64;
    for _ in 0..100 {
        let mut a = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let x = rng.random::<f64>() * 4.0 - 2.0;
                a[i][j] = x;
                a[j][i] = x;
            }
        }
        let got = eigvalsh(&DenseHermitian::from_real_rows(3, &a.concat()).unwrap()).unwrap();
        let want = cubic_oracle(a);
        for k in 0..3 {
            worst_cubic = worst_cubic.max((got[k] - want[k]).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_res <= 1e-10 && worst_gram <= 1e-10 && worst_cubic <= 1e-10 && secs < 10.0,
        format!("residual/||A|| {worst_res:.1e}, Gram {worst_gram:.1e}, cubic {worst_cubic:.1e}, {secs:.2} s"),
    )
}

fn outlier_location_criterion() -> Outcome {
    let rep = experiment(ExperimentKind::Outliers, json!({"n": 1000, "replicas": 200, "master_seed": 3}));
    let lam = SummaryStats::from_slice(&raw(&rep, "lambda_j1_i1"));
    let dev = (lam.mean - 2.5).abs();
    outcome(
        lam.count == 200 && dev <= 0.01,
        format!(
            "mean lambda_1 = {:.5} over {} replicas, |mean - 2.5| = {dev:.5} (tol 0.01)",
            lam.mean, lam.count
        ),
    )
}

fn case_b_variance_criterion() -> Outcome {
    let rep = experiment(
        ExperimentKind::Outliers,
        json!({"n": 1000, "replicas": 1000, "beta": 2, "master_seed": 4}),
    );
    let s = raw(&rep, "s_j1_i1");
    let var = SummaryStats::from_slice(&s).variance();
    let target: f64 = 4.0 / 3.0;
    let ks = ks_statistic(&s.iter().map(|x| x / target.sqrt()).collect::<Vec<_>>(), 0.0, 1.0).unwrap();
    let rel = (var - target).abs() / target;
    outcome(
        s.len() == 1000 && rel <= 0.15 && ks.p_value > 0.01,
        format!(
            "beta=2: Var(s) = {var:.4} vs 4/3 (rel. error {rel:.3}, tol 0.15); KS D = {:.4}, p = {:.3}",
            ks.statistic, ks.p_value
        ),
    )
}

fn third_moment_criterion() -> Outcome {
    let n = 1000.0;
    let skewed = experiment(
        ExperimentKind::Outliers,
        json!({"n": 1000, "replicas": 1000, "master_seed": 5, "law": {"kind": "standardized-bernoulli", "p": 0.2, "sigma": 1.0}}),
    );
    let control = experiment(ExperimentKind::Outliers, json!({"n": 1000, "replicas": 1000, "master_seed": 6}));
    // μ₃ = (1 − 2p)/√(p(1 − p)) = 1.5; shift (1/θ²)·μ₃·((Σu)² − 1)/N = 1.5·(N − 1)/N/4
    let shift = 1.5 * (n - 1.0) / n / 4.0;
    let a = SummaryStats::from_slice(&raw(&skewed, "s_j1_i1"));
    let b = SummaryStats::from_slice(&raw(&control, "s_j1_i1"));
    let pass_a = (a.mean - shift).abs() <= 3.0 * a.sem();
    let pass_b = b.mean.abs() <= 3.0 * b.sem();
    outcome(
        pass_a && pass_b && a.count == 1000 && b.count == 1000,
        format!(
            "bernoulli(0.2): mean s = {:.4} vs {shift:.6} (3 SE = {:.4}); gaussian: mean s = {:.4} vs 0 (3 SE = {:.4})",
            a.mean,
            3.0 * a.sem(),
            b.mean,
            3.0 * b.sem()
        ),
    )
}

fn xi_proxy_criterion() -> Outcome {
    let rep = experiment(
        ExperimentKind::XiProxy,
        json!({"n_ladder": [500, 1000, 2000], "replicas": 100, "master_seed": 7}),
    );
    let medians: Vec<f64> = [500, 1000, 2000]
        .iter()
        .map(|n| spiked_wigner::stats::median(&raw(&rep, &format!("residual_n{n}"))))
        .collect();
    let counts: Vec<u64> = [500, 1000, 2000]
        .iter()
        .map(|n| rep.statistic(&format!("residual_n{n}")).unwrap().summary.count)
        .collect();
    let pass = medians.windows(2).all(|w| w[1] < w[0]) && rep.skipped == 0;
    outcome(
        pass,
        format!("median residual at N = 500, 1000, 2000: {medians:.4?} (kept {counts:?})"),
    )
}

fn resolvent_criterion() -> Outcome {
    let rep = experiment(
        ExperimentKind::Resolvent,
        json!({"n": 1000, "replicas": 2000, "z_points": [[3.0, 0.5], [2.5, 0.0]], "master_seed": 8}),
    );
    // at z = ρ the l = p real-real target reduces to 2Π(ρ,ρ) = 2/(θ²(θ² − σ²)) = 1/6
    let anchor = rep.verdict("cov_re_re_l1p1_z2z2").unwrap();
    let anchor_ok = (anchor.target - 1.0 / 6.0).abs() < 1e-12;
    let cov: Vec<_> = rep.verdicts.iter().filter(|v| v.name.starts_with("cov_")).collect();
    let means: Vec<_> = rep.verdicts.iter().filter(|v| v.name.starts_with("mean_")).collect();
    let skip = rep.skipped as f64 / rep.replicas as f64;
    let bad: Vec<String> = cov
        .iter()
        .chain(&means)
        .filter(|v| !v.passed)
        .map(|v| format!("{} ({:.4} vs {:.4}, tol {:.4})", v.name, v.empirical, v.target, v.tolerance))
        .collect();
    let worst_cov = cov.iter().map(|v| (v.empirical - v.target).abs() / v.tolerance).fold(0.0, f64::max);
    let worst_mean = means
        .iter()
        .map(|v| (v.empirical - v.target).abs() / v.tolerance.max(1e-300))
        .fold(0.0, f64::max);
    outcome(
        anchor_ok && bad.is_empty() && skip < 0.01 && cov.len() == 36 && means.len() == 12,
        format!(
            "{} covariance entries (worst |diff|/tol {worst_cov:.2}), {} centering means (worst {worst_mean:.2}), skip rate {skip}; failing: {bad:?}",
            cov.len(),
            means.len()
        ),
    )
}

fn testfn_criterion() -> Outcome {
    let rep = experiment(ExperimentKind::Testfn, json!({"n": 1000, "replicas": 1000, "master_seed": 9}));
    // σ = 1: f = x gives σ² (l ≠ p) and 2σ² (l = p); f = x² gives σ⁴ and 2σ⁴
    let cases = [("f1_re_l1p2", 1.0), ("f1_re_l1p1", 2.0), ("f2_re_l1p2", 1.0), ("f2_re_l1p1", 2.0)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, target) in cases {
        let var = 1000.0 * SummaryStats::from_slice(&raw(&rep, name)).variance();
        let rel = (var - target).abs() / target;
        let reported = rep.verdicts.iter().find(|v| v.name.starts_with(&format!("var Y {name} "))).unwrap();
        pass &= rel <= 0.15 && (reported.target - target).abs() < 1e-10;
        parts.push(format!("{name}: {var:.4} vs {target}"));
    }
    outcome(pass, parts.join("; "))
}

fn catalan(k: u32) -> f64 {
    (0..k).fold(1.0, |c, i| c * 2.0 * (2 * i + 1) as f64 / (i + 2) as f64)
}

fn quadrature_criterion() -> Outcome {
    let mut worst = 0.0f64;
    for sigma in [1.0f64, 0.5, 2.0] {
        let rule = semicircle_quadrature(spiked_wigner::theory::DEFAULT_NODES, sigma).unwrap();
        for k in 0..=8u32 {
            let got = rule.integrate(|x| x.powi(k as i32));
            let want = if k % 2 == 1 { 0.0 } else { catalan(k / 2) * sigma.powi(k as i32) };
            // absolute at σ = 1, relative to σᵏ otherwise
            worst = worst.max((got - want).abs() / sigma.powi(k as i32));
        }
    }
    outcome(
        worst <= 1e-12,
        format!("moments m0..m8 for sigma in {{1, 0.5, 2}}: worst error {worst:.1e}"),
    )
}

fn steinitz_criterion() -> Outcome {
    let rep = experiment(ExperimentKind::SteinitzDemo, json!({"n": 500, "replicas": 50, "master_seed": 10}));
    let ratio = raw(&rep, "ratio").into_iter().fold(0.0, f64::max);
    let bij = raw(&rep, "bijective").iter().all(|&b| b == 1.0);
    let k = raw(&rep, "constant")[0];
    let count = raw(&rep, "ratio").len();
    outcome(
        count == 50 && ratio <= 1.0 && bij,
        format!("50 pairs at N = 500: max prefix / (K max|u|) = {ratio:.4} with K = {k}, all bijections: {bij}"),
    )
}

fn reproducibility_criterion() -> Outcome {
    let layers = [
        (ExperimentKind::Outliers, json!({"n": 300, "replicas": 30})),
        (ExperimentKind::XiProxy, json!({"n_ladder": [100, 200], "replicas": 12})),
        (ExperimentKind::Resolvent, json!({"n": 200, "replicas": 30, "beta": 2})),
        (ExperimentKind::Testfn, json!({"n": 200, "replicas": 30})),
        (ExperimentKind::SteinitzDemo, json!({"n": 200, "replicas": 8})),
    ];
    let mut same = Vec::new();
    for (kind, layer) in layers {
        let mut texts = Vec::new();
        for w in [1, 4] {
            let mut cfg = ExperimentConfig::from_layers(kind, Some(layer.clone()), &[]).unwrap();
            cfg.master_seed = 77;
            cfg.workers = w;
            let rep = run(&cfg).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let (path, _) = rep.write(dir.path(), kind.name()).unwrap();
            texts.push(std::fs::read(path).unwrap());
        }
        same.push((kind.name(), texts[0] == texts[1]));
    }
    outcome(
        same.iter().all(|(_, s)| *s),
        format!("byte-identical JSON for workers 1 and 4: {same:?}"),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("analytic identities", analytic_identities),
        ("eigensolver oracles", eigensolver_oracles),
        ("outlier location", outlier_location_criterion),
        ("Case B variance", case_b_variance_criterion),
        ("third-moment shift", third_moment_criterion),
        ("Xi proxy", xi_proxy_criterion),
        ("resolvent covariance", resolvent_criterion),
        ("test-function CLT", testfn_criterion),
        ("quadrature exactness", quadrature_criterion),
        ("Steinitz rearrangement", steinitz_criterion),
        ("reproducibility", reproducibility_criterion),
    ];
    let mut failed = Vec::new();
    for (i, (title, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let line = format!(
            "criterion {:>2} {} {title}: {} [{:.1} s]\n",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        // written directly so the line shows even when test output is captured
        std::io::stderr().write_all(line.as_bytes()).unwrap();
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
