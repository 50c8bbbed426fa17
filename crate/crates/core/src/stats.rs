//! Mergeable running moments and the one-sample Kolmogorov–Smirnov test.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::{Error, Result};

/// Count, mean, sum of squared deviations, min and max of a stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for SummaryStats {
    fn default() -> Self {
        SummaryStats {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl SummaryStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut s = Self::new();
        xs.iter().for_each(|&x| s.push(x));
        s
    }

    /// Welford update.
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&self, other: &SummaryStats) -> SummaryStats {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let d = other.mean - self.mean;
        SummaryStats {
            count: self.count + other.count,
            mean: self.mean + d * nb / n,
            m2: self.m2 + other.m2 + d * d * na * nb / n,
            min: self.min.min(other.min),
            max: self.max.max(other.max),
        }
    }

    /// Unbiased sample variance; zero below two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        if self.count == 0 {
            f64::INFINITY
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Sample median (mean of the middle pair for even sizes).
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Unbiased sample covariance of paired observations.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return 0.0;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1) as f64
}

/// Standard error of the sample covariance, from the spread of the products
/// `(x − x̄)(y − ȳ)`.
pub fn covariance_se(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return f64::INFINITY;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    SummaryStats::from_slice(&prods).sem()
}

/// Result of a one-sample KS test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2))
}

/// Kolmogorov–Smirnov statistic of `sample` against `N(mean, variance)`,
/// with the asymptotic p-value `Q(λ) = 2Σ(−1)^{j−1}e^{−2j²λ²}`,
/// `λ = (√n + 0.12 + 0.11/√n)·D`.
pub fn ks_statistic(sample: &[f64], mean: f64, variance: f64) -> Result<KsResult> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::InvalidTarget(format!("variance must be positive, got {variance}")));
    }
    if sample.len() < 20 {
        return Err(Error::InvalidTarget(format!("need at least 20 points, got {}", sample.len())));
    }
    let sd = variance.sqrt();
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = normal_cdf(x, mean, sd);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let root = n.sqrt();
    let lambda = (root + 0.12 + 0.11 / root) * d;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q(lambda),
    })
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += sign * term;
        if term <= 1e-12 * sum.abs().max(1e-300) || term < 1e-300 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = Stream::new(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn welford_matches_two_pass() {
        let xs = normals(1, 1000);
        let s = SummaryStats::from_slice(&xs);
        let mean = xs.iter().sum::<f64>() / 1000.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 999.0;
        assert!((s.mean - mean).abs() < 1e-14);
        assert!((s.variance() - var).abs() < 1e-12);
        assert_eq!(s.min, xs.iter().copied().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn merge_of_halves_equals_single_pass() {
        let xs = normals(2, 1001);
        let whole = SummaryStats::from_slice(&xs);
        let (a, b) = xs.split_at(400);
        let merged = SummaryStats::from_slice(a).merge(&SummaryStats::from_slice(b));
        assert_eq!(merged.count, whole.count);
        assert!((merged.mean - whole.mean).abs() <= 1e-12 * whole.mean.abs().max(1.0));
        assert!((merged.m2 - whole.m2).abs() <= 1e-12 * whole.m2);
        assert_eq!(SummaryStats::new().merge(&whole), whole);
    }

    proptest::proptest! {
        #[test]
        fn merge_is_associative(xs in proptest::collection::vec(-1e3f64..1e3, 3..60), c1 in 0usize..60, c2 in 0usize..60) {
            let n = xs.len();
            let (i, j) = (c1.min(c2) % n, c1.max(c2) % n);
            let (i, j) = (i.min(j), i.max(j));
            let a = SummaryStats::from_slice(&xs[..i]);
            let b = SummaryStats::from_slice(&xs[i..j]);
            let c = SummaryStats::from_slice(&xs[j..]);
            let left = a.merge(&b).merge(&c);
            let right = a.merge(&b.merge(&c));
            let swapped = c.merge(&a).merge(&b);
            for s in [right, swapped] {
                proptest::prop_assert!((left.mean - s.mean).abs() <= 1e-12 * left.mean.abs().max(1.0));
                proptest::prop_assert!((left.m2 - s.m2).abs() <= 1e-12 * left.m2.max(1.0));
                proptest::prop_assert_eq!(left.count, s.count);
            }
        }
    }

    #[test]
    fn median_and_covariance() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [2.0, 4.0, 6.0, 8.0];
        assert!((covariance(&xs, &ys) - 2.0 * SummaryStats::from_slice(&xs).variance()).abs() < 1e-15);
    }

    #[test]
    fn ks_self_consistency() {
        let mut ok = 0;
        let seeds = 200;
        for seed in 0..seeds {
            let xs = normals(100 + seed, 10_000);
            if ks_statistic(&xs, 0.0, 1.0).unwrap().p_value > 0.001 {
                ok += 1;
            }
        }
        assert!(ok as f64 >= 0.99 * seeds as f64, "{ok} of {seeds}");
    }

    #[test]
    fn ks_point_mass_and_shift() {
        let xs = vec![0.3; 50];
        assert!(ks_statistic(&xs, 0.0, 1.0).unwrap().statistic >= 0.5);
        let shifted: Vec<f64> = normals(5, 1000).into_iter().map(|x| x + 5.0).collect();
        assert!(ks_statistic(&shifted, 0.0, 1.0).unwrap().p_value < 1e-6);
    }

    #[test]
    fn ks_errors() {
        let xs = normals(6, 30);
        assert!(matches!(ks_statistic(&xs, 0.0, 0.0), Err(Error::InvalidTarget(_))));
        assert!(matches!(ks_statistic(&xs[..10], 0.0, 1.0), Err(Error::InvalidTarget(_))));
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Q(1.36) ≈ 0.049, Q(1.63) ≈ 0.010
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.628) - 0.01).abs() < 1e-3);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }
}
