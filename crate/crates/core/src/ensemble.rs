//! Entry laws, scaled Wigner matrices and the third-moment quadratic form.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::Stream;
use crate::spectral::{Beta, DenseHermitian};
use crate::{Complex64, Error, Result};

/// Shape of a centered, unit-variance scalar law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawKind {
    Gaussian,
    /// ±1 with equal probability.
    Rademacher,
    /// A Bernoulli(p) variable centered and scaled to unit variance.
    StandardizedBernoulli {
        p: f64,
    },
    /// Uniform on [−√3, √3].
    Uniform,
}

impl LawKind {
    fn name(&self) -> &'static str {
        match self {
            LawKind::Gaussian => "gaussian",
            LawKind::Rademacher => "rademacher",
            LawKind::StandardizedBernoulli { .. } => "standardized-bernoulli",
            LawKind::Uniform => "uniform",
        }
    }

    /// Third moment of the unit-variance law.
    pub fn unit_third_moment(&self) -> f64 {
        match *self {
            LawKind::StandardizedBernoulli { p } => (1.0 - 2.0 * p) / (p * (1.0 - p)).sqrt(),
            _ => 0.0,
        }
    }

    /// Fourth moment of the unit-variance law.
    pub fn unit_fourth_moment(&self) -> f64 {
        match *self {
            LawKind::Gaussian => 3.0,
            LawKind::Rademacher => 1.0,
            LawKind::StandardizedBernoulli { p } => (1.0 - 3.0 * p + 3.0 * p * p) / (p * (1.0 - p)),
            LawKind::Uniform => 1.8,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(self, LawKind::StandardizedBernoulli { .. })
    }

    /// One draw of the unit-variance law.
    #[inline]
    pub fn sample_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            LawKind::Gaussian => rng.sample(StandardNormal),
            LawKind::Rademacher => {
                if rng.next_u64() >> 63 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            LawKind::StandardizedBernoulli { p } => {
                let (hi, lo) = bernoulli_atoms(p);
                if rng.random::<f64>() < p {
                    hi
                } else {
                    lo
                }
            }
            LawKind::Uniform => (2.0 * rng.random::<f64>() - 1.0) * 3f64.sqrt(),
        }
    }

    /// Atoms and probabilities of a discrete unit law, `None` for continuous laws.
    fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match *self {
            LawKind::Rademacher => Some(vec![(1.0, 0.5), (-1.0, 0.5)]),
            LawKind::StandardizedBernoulli { p } => {
                let (hi, lo) = bernoulli_atoms(p);
                Some(vec![(hi, p), (lo, 1.0 - p)])
            }
            _ => None,
        }
    }
}

fn bernoulli_atoms(p: f64) -> (f64, f64) {
    (((1.0 - p) / p).sqrt(), -(p / (1.0 - p)).sqrt())
}

/// A centered entry law: off-diagonal standard deviation `sigma`, diagonal
/// standard deviation `diag_sigma` (σ₁).
///
/// JSON form: `{"kind":"standardized-bernoulli","p":0.2,"sigma":1.0}`;
/// `diag_sigma` defaults to `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLaw", into = "RawLaw")]
pub struct EntryLaw {
    pub kind: LawKind,
    pub sigma: f64,
    pub diag_sigma: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLaw {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default = "one")]
    sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diag_sigma: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawLaw> for EntryLaw {
    type Error = Error;

    fn try_from(raw: RawLaw) -> Result<Self> {
        let kind = match (raw.kind.as_str(), raw.p) {
            ("gaussian", None) => LawKind::Gaussian,
            ("rademacher", None) => LawKind::Rademacher,
            ("uniform", None) => LawKind::Uniform,
            ("standardized-bernoulli", Some(p)) => LawKind::StandardizedBernoulli { p },
            ("standardized-bernoulli", None) => return Err(Error::InvalidLaw("standardized-bernoulli needs \"p\"".into())),
            (k @ ("gaussian" | "rademacher" | "uniform"), Some(_)) => return Err(Error::InvalidLaw(format!("law {k} takes no \"p\""))),
            (other, _) => return Err(Error::InvalidLaw(format!("unknown law kind {other:?}"))),
        };
        EntryLaw::new(kind, raw.sigma, raw.diag_sigma.unwrap_or(raw.sigma))
    }
}

impl From<EntryLaw> for RawLaw {
    fn from(law: EntryLaw) -> Self {
        RawLaw {
            kind: law.kind.name().to_string(),
            p: match law.kind {
                LawKind::StandardizedBernoulli { p } => Some(p),
                _ => None,
            },
            sigma: law.sigma,
            diag_sigma: Some(law.diag_sigma),
        }
    }
}

impl EntryLaw {
    pub fn new(kind: LawKind, sigma: f64, diag_sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidLaw(format!("sigma must be positive, got {sigma}")));
        }
        if !(diag_sigma.is_finite() && diag_sigma >= 0.0) {
            return Err(Error::InvalidLaw(format!("diag_sigma must be nonnegative, got {diag_sigma}")));
        }
        if let LawKind::StandardizedBernoulli { p } = kind {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidLaw(format!("bernoulli p must lie in (0, 1), got {p}")));
            }
        }
        Ok(EntryLaw { kind, sigma, diag_sigma })
    }

    pub fn gaussian(sigma: f64) -> Self {
        EntryLaw::new(LawKind::Gaussian, sigma, sigma).expect("valid gaussian law")
    }

    /// Moments of an off-diagonal entry `W_ij` in symmetry class `beta`.
    ///
    /// For β = 2 the real part follows the law with variance σ²/2 and the
    /// imaginary part its sign-symmetrized version, so `μ₃ = E|W|²W` stays real.
    pub fn profile(&self, beta: Beta) -> MomentProfile {
        let s = self.sigma;
        let (mu3, m4) = (self.kind.unit_third_moment(), self.kind.unit_fourth_moment());
        match beta {
            Beta::Real => MomentProfile {
                variance: s * s,
                third_moment: s.powi(3) * mu3,
                fourth_moment: s.powi(4) * m4,
            },
            Beta::Complex => MomentProfile {
                variance: s * s,
                third_moment: s.powi(3) * mu3 / (2.0 * 2f64.sqrt()),
                fourth_moment: s.powi(4) * (m4 + 1.0) / 2.0,
            },
        }
    }

    /// `E[W 1{|W| ≤ t}]` for an off-diagonal entry.
    pub fn truncated_mean(&self, beta: Beta, t: f64) -> Complex64 {
        let atoms = match self.kind.atoms() {
            // symmetric continuous laws truncated symmetrically stay centered
            None => return Complex64::new(0.0, 0.0),
            Some(a) => a,
        };
        let re = match beta {
            Beta::Real => atoms
                .iter()
                .map(|&(x, pr)| {
                    let w = self.sigma * x;
                    if w.abs() <= t {
                        pr * w
                    } else {
                        0.0
                    }
                })
                .sum(),
            Beta::Complex => {
                let h = self.sigma / 2f64.sqrt();
                let mut acc = 0.0;
                for &(x, px) in &atoms {
                    for &(y, py) in &atoms {
                        let (r, i) = (h * x, h * y);
                        if r * r + i * i <= t * t {
                            acc += px * py * r;
                        }
                    }
                }
                acc
            }
        };
        Complex64::new(re, 0.0)
    }

    /// One off-diagonal entry (unscaled) from a dedicated stream.
    #[inline]
    fn draw_offdiag(&self, beta: Beta, rng: &mut Stream) -> Complex64 {
        match beta {
            Beta::Real => Complex64::new(self.sigma * self.kind.sample_unit(rng), 0.0),
            Beta::Complex => {
                let h = self.sigma / 2f64.sqrt();
                let re = h * self.kind.sample_unit(rng);
                let im = h * self.kind.sample_unit(rng);
                let sign = if rng.next_u64() >> 63 == 0 { 1.0 } else { -1.0 };
                Complex64::new(re, sign * im)
            }
        }
    }

    #[inline]
    fn draw_diag(&self, rng: &mut Stream) -> f64 {
        self.diag_sigma * self.kind.sample_unit(rng)
    }

    /// An unscaled `k × k` Wigner matrix with this law, entries drawn from `rng`.
    pub fn sample_small<R: Rng + ?Sized>(&self, k: usize, beta: Beta, rng: &mut R) -> DenseHermitian {
        let mut m = DenseHermitian::zeros(k, beta);
        for i in 0..k {
            m.set_real(i, i, self.diag_sigma * self.kind.sample_unit(rng));
            for j in i + 1..k {
                let v = match beta {
                    Beta::Real => Complex64::new(self.sigma * self.kind.sample_unit(rng), 0.0),
                    Beta::Complex => {
                        let h = self.sigma / 2f64.sqrt();
                        let re = h * self.kind.sample_unit(rng);
                        let im = h * self.kind.sample_unit(rng);
                        let sign = if rng.next_u64() >> 63 == 0 { 1.0 } else { -1.0 };
                        Complex64::new(re, sign * im)
                    }
                };
                m.set(i, j, v);
            }
        }
        m
    }
}

/// Moments of an off-diagonal entry: `E|W|²`, `μ₃ = E|W|²W`, `E|W|⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    pub variance: f64,
    pub third_moment: f64,
    pub fourth_moment: f64,
}

/// A scaled Wigner matrix `X_N = W_N / √N` and the inputs that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerSample {
    pub matrix: DenseHermitian,
    pub n: usize,
    pub beta: Beta,
    pub seed: u64,
    pub law: EntryLaw,
}

/// Samples `X_N = W_N/√N`.
///
/// Entry `(i, j)`, `i ≤ j`, is drawn from its own stream keyed by
/// `(seed, i, j)`, so the result does not depend on fill order.
pub fn sample_wigner(law: &EntryLaw, n: usize, beta: u8, seed: u64) -> Result<WignerSample> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("Wigner matrices need n >= 2, got {n}")));
    }
    let beta = Beta::try_from(beta)?;
    let scale = 1.0 / (n as f64).sqrt();
    let mut m = DenseHermitian::zeros(n, beta);
    match beta {
        Beta::Real => {
            let data = m.real_packed_mut().expect("real storage");
            let mut k = 0;
            for i in 0..n {
                let mut rng = Stream::from_words(&[seed, i as u64, i as u64]);
                data[k] = law.draw_diag(&mut rng) * scale;
                k += 1;
                for j in i + 1..n {
                    let mut rng = Stream::from_words(&[seed, i as u64, j as u64]);
                    data[k] = law.sigma * law.kind.sample_unit(&mut rng) * scale;
                    k += 1;
                }
            }
        }
        Beta::Complex => {
            let data = m.complex_packed_mut().expect("complex storage");
            let mut k = 0;
            for i in 0..n {
                let mut rng = Stream::from_words(&[seed, i as u64, i as u64]);
                data[k] = Complex64::new(law.draw_diag(&mut rng) * scale, 0.0);
                k += 1;
                for j in i + 1..n {
                    let mut rng = Stream::from_words(&[seed, i as u64, j as u64]);
                    data[k] = law.draw_offdiag(beta, &mut rng) * scale;
                    k += 1;
                }
            }
        }
    }
    Ok(WignerSample {
        matrix: m,
        n,
        beta,
        seed,
        law: *law,
    })
}

/// Truncates off-diagonal entries at `|W_ij| ≤ N^{1/4}`, re-centers them by
/// the law's truncated mean and zeroes the diagonal.
pub fn truncate_center(sample: &WignerSample) -> WignerSample {
    let n = sample.n;
    let root = (n as f64).sqrt();
    let t = (n as f64).powf(0.25);
    let shift = sample.law.truncated_mean(sample.beta, t);
    let mut out = sample.clone();
    let m = &mut out.matrix;
    for i in 0..n {
        m.set_real(i, i, 0.0);
        for j in i + 1..n {
            let w = m.get(i, j) * root;
            let kept = if w.norm() <= t { w } else { Complex64::new(0.0, 0.0) };
            m.set(i, j, (kept - shift) / root);
        }
    }
    out
}

fn check_unit(u: &[f64], name: &str) -> Result<()> {
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidVector(format!("{name} has norm {norm}, expected 1")));
    }
    Ok(())
}

/// `(1/N)⟨u, M₃ v⟩` for a homogeneous third moment, in closed form:
/// `(μ₃/N)·[(Σᵢ uᵢ)(Σⱼ vⱼ) − ⟨u, v⟩]`.
pub fn m3_quadform(profile: &MomentProfile, u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::InvalidDimension(format!("vectors of length {} and {}", u.len(), v.len())));
    }
    check_unit(u, "u")?;
    check_unit(v, "v")?;
    let n = u.len() as f64;
    let su: f64 = u.iter().sum();
    let sv: f64 = v.iter().sum();
    let uv: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok(profile.third_moment / n * (su * sv - uv))
}
