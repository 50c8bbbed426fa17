//! Closed-form large-`N` predictions: the semicircle Stieltjes transform,
//! outlier locations, the resolvent covariance kernel `Π`, the Case A and
//! Case B limit laws, and semicircle quadrature for test functions.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::deformation::Frame;
use crate::ensemble::{m3_quadform, EntryLaw, MomentProfile};
use crate::spectral::{eigvalsh, Beta, DenseHermitian};
use crate::{Complex64, Error, Result};

const CUT_TOL: f64 = 1e-12;

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidLaw(format!("sigma must be positive, got {sigma}")))
    }
}

/// `g_σ(z)` and its derivative at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemicirclePoint {
    pub z: Complex64,
    pub g: Complex64,
    pub g_prime: Complex64,
}

/// Stieltjes transform of the semicircle law of variance `σ²`,
/// `g = (z − √(z−2σ)·√(z+2σ))/(2σ²)` with principal roots.
pub fn stieltjes_g(z: Complex64, sigma: f64) -> Result<SemicirclePoint> {
    check_sigma(sigma)?;
    // a signed zero imaginary part would flip the principal roots below the axis
    let z = Complex64::new(z.re, if z.im == 0.0 { 0.0 } else { z.im });
    if z.im.abs() <= CUT_TOL && z.re.abs() < 2.0 * sigma {
        return Err(Error::OnBranchCut(z));
    }
    let s = (z - 2.0 * sigma).sqrt() * (z + 2.0 * sigma).sqrt();
    // (z − s)/(2σ²) rewritten as 2/(z + s) to avoid cancellation for large |z|
    let g = 2.0 / (z + s);
    let g_prime = if s == Complex64::new(0.0, 0.0) {
        Complex64::new(f64::NEG_INFINITY, 0.0)
    } else {
        -g / s
    };
    Ok(SemicirclePoint { z, g, g_prime })
}

/// `ρ_θ = θ + σ²/θ` when `|θ| > σ`, `None` when the eigenvalue sticks to the edge.
pub fn outlier_location(theta: f64, sigma: f64) -> Result<Option<f64>> {
    check_sigma(sigma)?;
    if theta == 0.0 || !theta.is_finite() {
        return Err(Error::InvalidSpike(format!("theta must be finite and nonzero, got {theta}")));
    }
    Ok((theta.abs() > sigma).then(|| theta + sigma * sigma / theta))
}

fn supercritical(theta: f64, sigma: f64) -> Result<()> {
    check_sigma(sigma)?;
    if theta.abs() > sigma {
        Ok(())
    } else {
        Err(Error::BelowPhaseTransition { theta, sigma })
    }
}

/// `c_θ = θ²/(θ² − σ²)`.
pub fn c_theta(theta: f64, sigma: f64) -> Result<f64> {
    supercritical(theta, sigma)?;
    Ok(theta * theta / (theta * theta - sigma * sigma))
}

/// `−1/g′(ρ_θ) = θ² − σ²`.
pub fn neg_inv_gprime(theta: f64, sigma: f64) -> Result<f64> {
    supercritical(theta, sigma)?;
    Ok(theta * theta - sigma * sigma)
}

/// Covariance kernel `Π(z₁,z₂) = −g₁g₂ + g₁g₂/(1 − σ²g₁g₂)`.
pub fn pi_cov(z1: Complex64, z2: Complex64, sigma: f64) -> Result<Complex64> {
    let g1 = stieltjes_g(z1, sigma)?.g;
    let g2 = stieltjes_g(z2, sigma)?.g;
    let p = g1 * g2;
    let den = 1.0 - sigma * sigma * p;
    if den.norm() <= 1e-12 {
        return Err(Error::KernelSingularity(z1, z2));
    }
    Ok(-p + p / den)
}

/// `−1 + 1/(1 − σ²g(z₁)g(z₂))`, the kernel of the limiting variance sums.
pub fn variance_kernel(z1: Complex64, z2: Complex64, sigma: f64) -> Result<Complex64> {
    let g1 = stieltjes_g(z1, sigma)?.g;
    let g2 = stieltjes_g(z2, sigma)?.g;
    let den = 1.0 - sigma * sigma * g1 * g2;
    if den.norm() <= 1e-12 {
        return Err(Error::KernelSingularity(z1, z2));
    }
    Ok(-1.0 + 1.0 / den)
}

/// Cross-covariances of the limiting resolvent field `Γ_lp`:
/// `[[Re·Re, Re·Im], [Im·Re, Im·Im]]` between `Γ_lp(z₁)` (row) and `Γ_lp(z₂)` (column).
///
/// The field satisfies `E[Γ(z₁)Γ(z₂)] = (r + δ)·Π(z₁,z₂)` and
/// `E[Γ(z₁)conj Γ(z₂)] = (1 + rδ)·Π(z₁,z̄₂)` with `r` the real indicator of
/// `beta` and `δ = same_index`; the real and imaginary blocks follow from
/// `Re a = (a + ā)/2`, `Im a = (a − ā)/(2i)`.
pub fn gamma_covariance(z1: Complex64, z2: Complex64, sigma: f64, same_index: bool, beta: Beta) -> Result<[[f64; 2]; 2]> {
    let r = beta.real_indicator();
    let d = if same_index { 1.0 } else { 0.0 };
    let a = r + d;
    let b = 1.0 + r * d;
    let re_im = |w1: Complex64, w2: Complex64| -> Result<f64> {
        let p = pi_cov(w1, w2, sigma)?;
        let pbb = pi_cov(w1.conj(), w2.conj(), sigma)?;
        let pb2 = pi_cov(w1, w2.conj(), sigma)?;
        let p1b = pi_cov(w1.conj(), w2, sigma)?;
        let v = (a * (p - pbb) + b * (p1b - pb2)) / Complex64::new(0.0, 4.0);
        Ok(v.re)
    };
    let p = pi_cov(z1, z2, sigma)?;
    let pbb = pi_cov(z1.conj(), z2.conj(), sigma)?;
    let pb2 = pi_cov(z1, z2.conj(), sigma)?;
    let p1b = pi_cov(z1.conj(), z2, sigma)?;
    let rr = (a * (p + pbb) + b * (pb2 + p1b)) / 4.0;
    let ii = (-a * (p + pbb) + b * (pb2 + p1b)) / 4.0;
    Ok([[rr.re, re_im(z1, z2)?], [re_im(z2, z1)?, ii.re]])
}

/// Limit law of `c_θ√N(λ − ρ_θ)` for the top `k` outliers of one spike with
/// a delocalized frame: eigenvalues of `shift + G`, with `G` a `k × k`
/// GOE/GUE matrix whose off-diagonal entries have variance
/// `θ²σ²/(θ²−σ²)` and diagonal entries `(2/β)` times that.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseBLimit {
    pub gaussian_variance: f64,
    /// Row-major `k × k`, `shift_lp = (1/θ²)·(1/N)⟨uˡ, M₃ uᵖ⟩`.
    pub shift: Vec<f64>,
    pub k: usize,
    pub beta: Beta,
}

impl CaseBLimit {
    pub fn shift(&self, l: usize, p: usize) -> f64 {
        self.shift[l * self.k + p]
    }

    /// Variance of a diagonal entry of the Gaussian part.
    pub fn diagonal_variance(&self) -> f64 {
        2.0 / self.beta.as_f64() * self.gaussian_variance
    }

    /// One draw of the limiting vector (descending).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let k = self.k;
        let mut m = DenseHermitian::zeros(k, self.beta);
        let sd_diag = self.diagonal_variance().sqrt();
        for l in 0..k {
            let x: f64 = StandardNormal.sample(rng);
            m.set_real(l, l, self.shift(l, l) + sd_diag * x);
            for p in l + 1..k {
                let g = gaussian_entry(self.gaussian_variance, self.beta, rng);
                m.set(l, p, g + self.shift(l, p));
            }
        }
        let mut v = eigvalsh(&m)?;
        v.reverse();
        Ok(v)
    }
}

fn gaussian_entry<R: Rng + ?Sized>(variance: f64, beta: Beta, rng: &mut R) -> Complex64 {
    match beta {
        Beta::Real => Complex64::new(variance.sqrt() * Distribution::<f64>::sample(&StandardNormal, rng), 0.0),
        Beta::Complex => {
            let h = (variance / 2.0).sqrt();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(h * re, h * im)
        }
    }
}

/// Case B limit parameters for one spike.
pub fn case_b_limit(theta: f64, sigma: f64, beta: Beta, frame: &Frame, profile: &MomentProfile, n: usize) -> Result<CaseBLimit> {
    supercritical(theta, sigma)?;
    if frame.n() != n {
        return Err(Error::InvalidDimension(format!("frame of length {} for n = {n}", frame.n())));
    }
    let k = frame.k();
    let cols = frame.columns();
    let mut shift = vec![0.0; k * k];
    for l in 0..k {
        for p in 0..k {
            shift[l * k + p] = m3_quadform(profile, &cols[l], &cols[p])? / (theta * theta);
        }
    }
    Ok(CaseBLimit {
        gaussian_variance: theta * theta * sigma * sigma / (theta * theta - sigma * sigma),
        shift,
        k,
        beta,
    })
}

/// Variances of the Gaussian matrix `H` in the Case A law: `(diagonal, off-diagonal)`.
///
/// The diagonal is `(m₄ − (4−β)σ⁴)/θ² + (2/β)σ⁴/(θ²−σ²)`, the off-diagonal
/// `E|H_st|² = σ⁴/(θ²−σ²)`.
pub fn case_a_h_variances(theta: f64, sigma: f64, beta: Beta, fourth_moment: f64) -> Result<(f64, f64)> {
    supercritical(theta, sigma)?;
    let (t2, s4) = (theta * theta, sigma.powi(4));
    let b = beta.as_f64();
    let diag = (fourth_moment - (4.0 - b) * s4) / t2 + 2.0 / b * s4 / (t2 - sigma * sigma);
    let off = s4 / (t2 - sigma * sigma);
    if diag < 0.0 {
        return Err(Error::InvalidLaw(format!(
            "fourth moment {fourth_moment} gives negative variance {diag}"
        )));
    }
    Ok((diag, off))
}

/// One draw of the ordered eigenvalues (descending) of `V = U*(W + H)U`,
/// the Case A limit of `c_θ√N(λ − ρ_θ)` for a localized frame.
///
/// `u` holds the `k` columns of `U`, each of length `K`; `W` is an unscaled
/// `K × K` Wigner matrix with entry law `law` and `H` the independent
/// Gaussian matrix with the variances of [`case_a_h_variances`].
pub fn case_a_limit_sampler<R: Rng + ?Sized>(theta: f64, beta: Beta, law: &EntryLaw, u: &[Vec<f64>], rng: &mut R) -> Result<Vec<f64>> {
    let sigma = law.sigma;
    let big_k = u.first().map_or(0, Vec::len);
    if big_k == 0 || u.iter().any(|c| c.len() != big_k) {
        return Err(Error::InvalidFrame("columns must be nonempty and of equal length".into()));
    }
    for (a, x) in u.iter().enumerate() {
        for (b, y) in u.iter().enumerate() {
            let g: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            if (g - want).abs() > 1e-12 {
                return Err(Error::InvalidFrame(format!("U has Gram entry ({a},{b}) = {g}")));
            }
        }
    }
    let (hd, ho) = case_a_h_variances(theta, sigma, beta, law.profile(beta).fourth_moment)?;
    let w = law.sample_small(big_k, beta, rng);
    let mut m = DenseHermitian::zeros(big_k, beta);
    for s in 0..big_k {
        let x: f64 = StandardNormal.sample(rng);
        m.set_real(s, s, w.get(s, s).re + hd.sqrt() * x);
        for t in s + 1..big_k {
            m.set(s, t, w.get(s, t) + gaussian_entry(ho, beta, rng));
        }
    }
    let k = u.len();
    let mut v = DenseHermitian::zeros(k, beta);
    for l in 0..k {
        for p in l..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..big_k {
                for t in 0..big_k {
                    acc += u[l][s] * m.get(s, t) * u[p][t];
                }
            }
            v.set(l, p, acc);
        }
    }
    let mut out = eigvalsh(&v)?;
    out.reverse();
    Ok(out)
}

/// Variance of `(1/k)·tr V` under the Case A law, where `W` has diagonal
/// variance `diag_variance` and off-diagonal variance `σ²`.
///
/// With `P = UUᵀ` this is
/// `k⁻²[Σₛ Pₛₛ²(diag_variance + h_d) + Σ_{s<t} 4Pₛₜ²(σ² + h_o)·(β=2 ? ½ : 1)]`.
pub fn case_a_trace_variance(theta: f64, sigma: f64, beta: Beta, fourth_moment: f64, diag_variance: f64, u: &[Vec<f64>]) -> Result<f64> {
    let (hd, ho) = case_a_h_variances(theta, sigma, beta, fourth_moment)?;
    let big_k = u.first().map_or(0, Vec::len);
    if big_k == 0 || u.iter().any(|c| c.len() != big_k) {
        return Err(Error::InvalidFrame("columns must be nonempty and of equal length".into()));
    }
    let p = |s: usize, t: usize| u.iter().map(|c| c[s] * c[t]).sum::<f64>();
    let re_share = match beta {
        Beta::Real => 1.0,
        Beta::Complex => 0.5,
    };
    let mut acc = 0.0;
    for s in 0..big_k {
        acc += p(s, s).powi(2) * (diag_variance + hd);
        for t in s + 1..big_k {
            acc += 4.0 * p(s, t).powi(2) * (sigma * sigma + ho) * re_share;
        }
    }
    let k = u.len() as f64;
    Ok(acc / (k * k))
}

/// Gauss–Chebyshev (second kind) rule for the semicircle law.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub sigma: f64,
}

pub const DEFAULT_NODES: usize = 256;
pub const MAX_NODES: usize = 4096;

/// Nodes `2σ cos(kπ/(n+1))`, weights `2 sin²(kπ/(n+1))/(n+1)`; exact for
/// polynomials of degree `≤ 2n − 1` against `μ_sc`.
pub fn semicircle_quadrature(n_nodes: usize, sigma: f64) -> Result<QuadratureRule> {
    check_sigma(sigma)?;
    if n_nodes < 2 {
        return Err(Error::InvalidDimension(format!("need at least 2 nodes, got {n_nodes}")));
    }
    let h = std::f64::consts::PI / (n_nodes + 1) as f64;
    let (nodes, weights) = (1..=n_nodes)
        .map(|k| {
            let t = k as f64 * h;
            (2.0 * sigma * t.cos(), 2.0 * t.sin().powi(2) / (n_nodes + 1) as f64)
        })
        .unzip();
    Ok(QuadratureRule { nodes, weights, sigma })
}

impl QuadratureRule {
    /// `∫ f dμ_sc`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Evaluates `value(rule)` on rules of 256, 512, … nodes until two
/// successive results agree to `1e-10`, stopping at 4096 nodes.
pub fn refine(sigma: f64, value: impl Fn(&QuadratureRule) -> f64) -> Result<f64> {
    let mut n = DEFAULT_NODES;
    let mut last = value(&semicircle_quadrature(n, sigma)?);
    while n < MAX_NODES {
        n *= 2;
        let next = value(&semicircle_quadrature(n, sigma)?);
        let done = (next - last).abs() <= 1e-10;
        last = next;
        if done {
            break;
        }
    }
    Ok(last)
}

/// A real test function, selectable from config as
/// `{"f":"poly","coeffs":[0,1]}` (ascending powers) or `{"f":"cos","freq":1.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "f", rename_all = "lowercase", deny_unknown_fields)]
pub enum TestFunction {
    Poly { coeffs: Vec<f64> },
    Cos { freq: f64 },
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            TestFunction::Cos { freq } => (freq * x).cos(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Poly { coeffs } => {
                let terms: Vec<String> = coeffs.iter().map(|c| format!("{c}")).collect();
                format!("poly[{}]", terms.join(","))
            }
            TestFunction::Cos { freq } => format!("cos[{freq}]"),
        }
    }
}

/// `(1+δ_{lp})/(2β)·∬(f(x)−f(y))² dμ_sc(x)dμ_sc(y)` by tensor quadrature.
pub fn testfn_variance(f: impl Fn(f64) -> f64, beta: Beta, same_index: bool, rule: &QuadratureRule) -> f64 {
    let vals: Vec<f64> = rule.nodes.iter().map(|&x| f(x)).collect();
    let mut acc = 0.0;
    for (a, (&fa, &wa)) in vals.iter().zip(&rule.weights).enumerate() {
        let mut row = 0.0;
        for (&fb, &wb) in vals[a + 1..].iter().zip(&rule.weights[a + 1..]) {
            row += wb * (fa - fb) * (fa - fb);
        }
        acc += 2.0 * wa * row;
    }
    let delta = if same_index { 1.0 } else { 0.0 };
    (1.0 + delta) / (2.0 * beta.as_f64()) * acc
}

/// Weight of the third-moment correction in the mean of `⟨uˡ, f(X̂) uᵖ⟩`:
/// `∫ f(x)(x³σ⁻⁶ − 2xσ⁻⁴) dμ_sc`.
///
/// This is the semicircle representation of `f ↦ (1/2πi)∮ f(z) g_σ(z)⁴ dz`,
/// the functional induced by the `g⁴⟨u, M₃ v⟩` term of the resolvent mean;
/// it annihilates `1, x, x²` and maps `x³` to 1.
pub fn m3_correction_integral(f: impl Fn(f64) -> f64, rule: &QuadratureRule) -> f64 {
    let s = rule.sigma;
    rule.integrate(|x| f(x) * (x.powi(3) / s.powi(6) - 2.0 * x / s.powi(4)))
}

/// `δ_{lp}∫f dμ_sc + N^{-1/2}·m3_shift·∫ f(x)(x³σ⁻⁶ − 2xσ⁻⁴) dμ_sc`, with
/// `m3_shift = (1/N)⟨uˡ, M₃ uᵖ⟩`.
pub fn testfn_mean(f: impl Fn(f64) -> f64, m3_shift: f64, n: usize, same_index: bool, rule: &QuadratureRule) -> f64 {
    let delta = if same_index { 1.0 } else { 0.0 };
    let base = delta * rule.integrate(&f);
    base + m3_shift / (n as f64).sqrt() * m3_correction_integral(&f, rule)
}

/// `g_σ(z)·δ + g_σ(z)⁴·m3_shift/√N`, the mean of `⟨uˡ, R̂(z) uᵖ⟩` to order `N^{-1/2}`.
pub fn resolvent_mean(z: Complex64, sigma: f64, same_index: bool, m3_shift: f64, n: usize) -> Result<Complex64> {
    let g = stieltjes_g(z, sigma)?.g;
    let delta = if same_index { 1.0 } else { 0.0 };
    Ok(g * delta + g.powi(4) * m3_shift / (n as f64).sqrt())
}
