//! Finite-rank perturbations `A_N = Σ_j θ_j U_j U_j*` and the Steinitz
//! rearrangement of zero-sum vector families.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::Stream;
use crate::{Complex64, Error, Result};

const GRAM_TOL: f64 = 1e-12;

/// How the eigenvectors of one spike are laid out.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameKind {
    /// `(1, …, 1)/√N`; rank one only.
    Uniform,
    /// Real and imaginary parts of discrete Fourier modes, `√(2/N)·cos`, `√(2/N)·sin`.
    Fourier,
    /// Columns supported on the first `K` coordinates with fixed coefficients;
    /// `coeffs[l]` holds the `K` nonzero coordinates of column `l`.
    Canonical { coeffs: Vec<Vec<f64>> },
    /// Orthonormalized i.i.d. Gaussian columns.
    RandomOrthogonal { seed: u64 },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawFrame {
    Name(String),
    Tagged(TaggedFrame),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaggedFrame {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coeffs: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl TryFrom<RawFrame> for FrameKind {
    type Error = Error;

    fn try_from(raw: RawFrame) -> Result<Self> {
        let (kind, coeffs, seed) = match raw {
            RawFrame::Name(s) => (s, None, None),
            RawFrame::Tagged(t) => (t.kind, t.coeffs, t.seed),
        };
        match (kind.as_str(), coeffs, seed) {
            ("uniform", None, None) => Ok(FrameKind::Uniform),
            ("fourier", None, None) => Ok(FrameKind::Fourier),
            ("canonical", Some(coeffs), None) => Ok(FrameKind::Canonical { coeffs }),
            ("random-orthogonal", None, Some(seed)) => Ok(FrameKind::RandomOrthogonal { seed }),
            ("random-orthogonal", None, None) => Ok(FrameKind::RandomOrthogonal { seed: 0 }),
            (k, _, _) => Err(Error::InvalidFrame(format!("cannot parse frame of kind {k:?}"))),
        }
    }
}

impl From<FrameKind> for RawFrame {
    fn from(kind: FrameKind) -> Self {
        match kind {
            FrameKind::Uniform => RawFrame::Name("uniform".into()),
            FrameKind::Fourier => RawFrame::Name("fourier".into()),
            FrameKind::Canonical { coeffs } => RawFrame::Tagged(TaggedFrame {
                kind: "canonical".into(),
                coeffs: Some(coeffs),
                seed: None,
            }),
            FrameKind::RandomOrthogonal { seed } => RawFrame::Tagged(TaggedFrame {
                kind: "random-orthogonal".into(),
                coeffs: None,
                seed: Some(seed),
            }),
        }
    }
}

impl Serialize for FrameKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawFrame::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FrameKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawFrame::deserialize(d)?;
        FrameKind::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// One spike: eigenvalue `theta` with multiplicity `mult`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spike {
    pub theta: f64,
    #[serde(default = "one")]
    pub mult: usize,
    pub frame: FrameKind,
}

fn one() -> usize {
    1
}

/// The deterministic perturbation: distinct nonzero `θ₁ > θ₂ > …` with
/// multiplicities and eigenvector frames.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Spike>", into = "Vec<Spike>")]
pub struct SpikeSpec {
    spikes: Vec<Spike>,
}

impl TryFrom<Vec<Spike>> for SpikeSpec {
    type Error = Error;

    fn try_from(spikes: Vec<Spike>) -> Result<Self> {
        SpikeSpec::new(spikes)
    }
}

impl From<SpikeSpec> for Vec<Spike> {
    fn from(spec: SpikeSpec) -> Self {
        spec.spikes
    }
}

impl SpikeSpec {
    pub fn new(spikes: Vec<Spike>) -> Result<Self> {
        for (j, s) in spikes.iter().enumerate() {
            if !s.theta.is_finite() || s.theta == 0.0 {
                return Err(Error::InvalidSpike(format!("spike {j}: theta must be finite and nonzero")));
            }
            if s.mult == 0 {
                return Err(Error::InvalidSpike(format!("spike {j}: multiplicity must be positive")));
            }
            if j > 0 && spikes[j - 1].theta <= s.theta {
                return Err(Error::InvalidSpike("thetas must be strictly decreasing".into()));
            }
            match &s.frame {
                FrameKind::Uniform if s.mult != 1 => {
                    return Err(Error::FrameKindMismatch(format!(
                        "spike {j}: uniform frame has rank one, multiplicity is {}",
                        s.mult
                    )))
                }
                FrameKind::Canonical { coeffs } if coeffs.len() != s.mult => {
                    return Err(Error::InvalidFrame(format!(
                        "spike {j}: {} coefficient columns for multiplicity {}",
                        coeffs.len(),
                        s.mult
                    )))
                }
                _ => {}
            }
        }
        Ok(SpikeSpec { spikes })
    }

    /// A single rank-one spike.
    pub fn single(theta: f64, frame: FrameKind) -> Result<Self> {
        SpikeSpec::new(vec![Spike { theta, mult: 1, frame }])
    }

    pub fn spikes(&self) -> &[Spike] {
        &self.spikes
    }

    pub fn is_empty(&self) -> bool {
        self.spikes.is_empty()
    }

    /// Total rank `r = Σ k_j`.
    pub fn rank(&self) -> usize {
        self.spikes.iter().map(|s| s.mult).sum()
    }

    /// Frames for every spike, jointly orthonormal. Deterministic frames are
    /// built first; random ones are then orthogonalized against all of them.
    pub fn build_frames(&self, n: usize) -> Result<Vec<Frame>> {
        if self.rank() > n {
            return Err(Error::InvalidDimension(format!("rank {} exceeds n = {n}", self.rank())));
        }
        let mut cols: Vec<Option<Vec<Vec<f64>>>> = vec![None; self.spikes.len()];
        let mut fourier_used = 0;
        for (j, s) in self.spikes.iter().enumerate() {
            cols[j] = match &s.frame {
                FrameKind::Uniform => Some(vec![vec![1.0 / (n as f64).sqrt(); n]]),
                FrameKind::Fourier => {
                    let c = fourier_columns(n, fourier_used, s.mult)?;
                    fourier_used += s.mult;
                    Some(c)
                }
                FrameKind::Canonical { coeffs } => Some(canonical_columns(n, coeffs)?),
                FrameKind::RandomOrthogonal { .. } => None,
            };
        }
        for (j, s) in self.spikes.iter().enumerate() {
            if let FrameKind::RandomOrthogonal { seed } = s.frame {
                let fixed: Vec<&Vec<f64>> = cols.iter().flatten().flatten().collect();
                let c = random_orthogonal_columns(n, s.mult, seed, &fixed)?;
                cols[j] = Some(c);
            }
        }
        let frames: Vec<Frame> = cols.into_iter().map(|c| Frame::new(c.expect("every frame built"))).collect();
        let all: Vec<&Vec<f64>> = frames.iter().flat_map(|f| f.columns.iter()).collect();
        let dev = gram_deviation(&all);
        if dev > GRAM_TOL {
            return Err(Error::InvalidFrame(format!(
                "frames are not jointly orthonormal (Gram deviation {dev:e})"
            )));
        }
        Ok(frames)
    }
}

/// Orthonormal eigenvector columns of one spike.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    columns: Vec<Vec<f64>>,
    infinity_norm: f64,
}

impl Frame {
    fn new(columns: Vec<Vec<f64>>) -> Self {
        let infinity_norm = columns.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        Frame { columns, infinity_norm }
    }

    /// Wraps given columns after checking orthonormality.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) || n == 0 {
            return Err(Error::InvalidFrame("columns must be nonempty and of equal length".into()));
        }
        let refs: Vec<&Vec<f64>> = columns.iter().collect();
        let dev = gram_deviation(&refs);
        if dev > GRAM_TOL {
            return Err(Error::InvalidFrame(format!("columns are not orthonormal (Gram deviation {dev:e})")));
        }
        Ok(Frame::new(columns))
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn n(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn k(&self) -> usize {
        self.columns.len()
    }

    /// Largest absolute entry.
    pub fn infinity_norm(&self) -> f64 {
        self.infinity_norm
    }

    /// Max-norm distance of the Gram matrix from the identity.
    pub fn gram_deviation(&self) -> f64 {
        gram_deviation(&self.columns.iter().collect::<Vec<_>>())
    }
}

/// Builds the frame of spike `j` as part of the joint construction.
pub fn build_frame(spec: &SpikeSpec, j: usize, n: usize) -> Result<Frame> {
    if j >= spec.spikes.len() {
        return Err(Error::InvalidSpike(format!("no spike with index {j}")));
    }
    Ok(spec.build_frames(n)?.swap_remove(j))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gram_deviation(cols: &[&Vec<f64>]) -> f64 {
    let mut dev = 0.0f64;
    for (a, u) in cols.iter().enumerate() {
        for (b, v) in cols.iter().enumerate().skip(a) {
            let target = if a == b { 1.0 } else { 0.0 };
            dev = dev.max((dot(u, v) - target).abs());
        }
    }
    dev
}

fn fourier_columns(n: usize, offset: usize, k: usize) -> Result<Vec<Vec<f64>>> {
    // column c uses frequency 1 + c/2; frequencies must stay below n/2
    let top = 1 + (offset + k - 1) / 2;
    if 2 * top >= n {
        return Err(Error::InvalidDimension(format!(
            "{} Fourier columns do not fit in dimension {n}",
            offset + k
        )));
    }
    let scale = (2.0 / n as f64).sqrt();
    Ok((offset..offset + k)
        .map(|c| {
            let f = (1 + c / 2) as f64;
            (0..n)
                .map(|i| {
                    let phase = std::f64::consts::TAU * f * i as f64 / n as f64;
                    scale * if c % 2 == 0 { phase.cos() } else { phase.sin() }
                })
                .collect()
        })
        .collect())
}

fn canonical_columns(n: usize, coeffs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let big_k = coeffs.first().map_or(0, Vec::len);
    if coeffs.iter().any(|c| c.len() != big_k) || big_k == 0 {
        return Err(Error::InvalidFrame(
            "canonical coefficient columns must share a nonzero length".into(),
        ));
    }
    if big_k > n {
        return Err(Error::InvalidDimension(format!("support size {big_k} exceeds n = {n}")));
    }
    let cols: Vec<Vec<f64>> = coeffs
        .iter()
        .map(|c| {
            let mut v = vec![0.0; n];
            v[..big_k].copy_from_slice(c);
            v
        })
        .collect();
    let dev = gram_deviation(&cols.iter().collect::<Vec<_>>());
    if dev > GRAM_TOL {
        return Err(Error::InvalidFrame(format!(
            "canonical coefficients are not orthonormal (Gram deviation {dev:e})"
        )));
    }
    Ok(cols)
}

/// Modified Gram–Schmidt with one re-orthogonalization pass, against `fixed` first.
fn random_orthogonal_columns(n: usize, k: usize, seed: u64, fixed: &[&Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut attempt = 0u64;
    while out.len() < k {
        let mut rng = Stream::from_words(&[seed, out.len() as u64, attempt]);
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let start = dot(&v, &v).sqrt();
        for _pass in 0..2 {
            for q in fixed.iter().copied().chain(out.iter()) {
                let c = dot(q, &v);
                for (x, y) in v.iter_mut().zip(q.iter()) {
                    *x -= c * y;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= 1e-8 * start {
            attempt += 1;
            if attempt > 16 {
                return Err(Error::InvalidDimension("no room left for a random orthogonal column".into()));
            }
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        out.push(v);
    }
    Ok(out)
}

/// `A_N x = Σ_j θ_j U_j (U_j* x)` without forming `A_N`.
pub fn apply_perturbation(spec: &SpikeSpec, frames: &[Frame], x: &[Complex64]) -> Result<Vec<Complex64>> {
    if frames.len() != spec.spikes.len() {
        return Err(Error::InvalidFrame(format!(
            "{} frames for {} spikes",
            frames.len(),
            spec.spikes.len()
        )));
    }
    let n = x.len();
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for (s, f) in spec.spikes.iter().zip(frames) {
        for u in &f.columns {
            if u.len() != n {
                return Err(Error::InvalidDimension(format!(
                    "vector of length {n} for frame of length {}",
                    u.len()
                )));
            }
            let c: Complex64 = u.iter().zip(x).map(|(&a, &b)| b * a).sum::<Complex64>() * s.theta;
            for (yi, &ui) in y.iter_mut().zip(u) {
                *yi += c * ui;
            }
        }
    }
    Ok(y)
}

/// A rearrangement with bounded prefix sums.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinitzOutcome {
    /// `permutation[t]` is the index of the vector placed at position `t`.
    pub permutation: Vec<usize>,
    /// The guaranteed constant `K`; prefix sums obey `‖·‖_∞ ≤ K·c`.
    pub constant: f64,
    /// Largest prefix-sum `∞`-norm actually attained.
    pub achieved: f64,
}

const FRAC_EPS: f64 = 1e-12;

/// Orders a zero-sum family of vectors in `ℝᵐ` so that every prefix sum has
/// `∞`-norm at most `m·c`, where `c` bounds the entries.
///
/// Positions are filled from the back. While `k > m` vectors remain, weights
/// `λ ∈ [0,1]ᵏ` with `Σλ = k − m` and `Σλᵢvᵢ = 0` are kept; they are scaled by
/// `(k−1−m)/(k−m)` and pushed to a vertex of the constraint polytope, which has
/// a zero weight; the lowest-index vector with zero weight takes position `k`.
/// The remaining prefix sum equals `Σ(1−λᵢ)vᵢ`, whence the bound.
pub fn steinitz_permute(vectors: &[Vec<f64>], c: f64) -> Result<SteinitzOutcome> {
    let n = vectors.len();
    let m = vectors.first().map_or(0, Vec::len);
    if vectors.iter().any(|v| v.len() != m) {
        return Err(Error::InvalidDimension("vectors must share one dimension".into()));
    }
    let max_entry = vectors.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    if max_entry > c * (1.0 + 1e-12) {
        return Err(Error::InvalidVector(format!("entry of size {max_entry} exceeds the bound {c}")));
    }
    let mut total = vec![0.0; m];
    for v in vectors {
        for (t, x) in total.iter_mut().zip(v) {
            *t += x;
        }
    }
    let residual = total.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if residual > 1e-10 {
        return Err(Error::NotZeroSum(residual));
    }
    let constant = m as f64;
    let identity: Vec<usize> = (0..n).collect();
    if max_entry == 0.0 || n <= m {
        let achieved = prefix_bound(vectors, &identity);
        return Ok(SteinitzOutcome {
            permutation: identity,
            constant,
            achieved,
        });
    }

    let mut active: Vec<usize> = identity;
    let mut weights = vec![(n - m) as f64 / n as f64; n];
    let mut placed = vec![0usize; n];
    let mut k = n;
    while k > m {
        let scale = (k - 1 - m) as f64 / (k - m) as f64;
        weights.iter_mut().for_each(|w| *w *= scale);
        push_to_vertex(vectors, &active, &mut weights, m);
        let drop = weights
            .iter()
            .position(|&w| w <= FRAC_EPS)
            .expect("a vertex of the weight polytope has a zero coordinate");
        placed[k - 1] = active.remove(drop);
        weights.remove(drop);
        k -= 1;
    }
    placed[..k].copy_from_slice(&active);
    let achieved = prefix_bound(vectors, &placed);
    Ok(SteinitzOutcome {
        permutation: placed,
        constant,
        achieved,
    })
}

/// Moves `weights` inside the polytope until at most `m + 1` are fractional.
fn push_to_vertex(vectors: &[Vec<f64>], active: &[usize], weights: &mut [f64], m: usize) {
    loop {
        let frac: Vec<usize> = (0..weights.len())
            .filter(|&i| weights[i] > FRAC_EPS && weights[i] < 1.0 - FRAC_EPS)
            .take(m + 2)
            .collect();
        if frac.len() <= m + 1 {
            for w in weights.iter_mut() {
                if *w <= FRAC_EPS {
                    *w = 0.0;
                } else if *w >= 1.0 - FRAC_EPS {
                    *w = 1.0;
                }
            }
            return;
        }
        // columns (v_i, 1) for the m + 2 chosen coordinates
        let cols: Vec<Vec<f64>> = frac
            .iter()
            .map(|&i| {
                let mut c = vectors[active[i]].clone();
                c.push(1.0);
                c
            })
            .collect();
        let d = null_vector(&cols);
        let mut step = f64::INFINITY;
        let mut hit = 0;
        for (t, &i) in frac.iter().enumerate() {
            let room = if d[t] > 0.0 {
                (1.0 - weights[i]) / d[t]
            } else if d[t] < 0.0 {
                -weights[i] / d[t]
            } else {
                continue;
            };
            if room < step {
                step = room;
                hit = t;
            }
        }
        for (t, &i) in frac.iter().enumerate() {
            weights[i] = (weights[i] + step * d[t]).clamp(0.0, 1.0);
        }
        let i = frac[hit];
        weights[i] = if d[hit] > 0.0 { 1.0 } else { 0.0 };
    }
}

/// A nonzero solution of `Σ_t d_t·cols[t] = 0` for `m + 2` columns in `ℝ^{m+1}`.
fn null_vector(cols: &[Vec<f64>]) -> Vec<f64> {
    let rows = cols[0].len();
    let ncols = cols.len();
    // a[r][c], reduced to row echelon form with partial pivoting
    let mut a: Vec<Vec<f64>> = (0..rows).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows {
            break;
        }
        let (best, size) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if size <= 1e-14 {
            continue;
        }
        a.swap(r, best);
        let p = a[r][c];
        for x in a[r].iter_mut() {
            *x /= p;
        }
        for i in 0..rows {
            if i != r {
                let f = a[i][c];
                if f != 0.0 {
                    for j in 0..ncols {
                        a[i][j] -= f * a[r][j];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free = (0..ncols).find(|c| !pivots.contains(c)).expect("more columns than rows");
    let mut d = vec![0.0; ncols];
    d[free] = 1.0;
    for (row, &pc) in pivots.iter().enumerate() {
        d[pc] = -a[row][free];
    }
    d
}

/// Largest `∞`-norm over all prefix sums in the given order.
pub fn prefix_bound(vectors: &[Vec<f64>], order: &[usize]) -> f64 {
    let m = vectors.first().map_or(0, Vec::len);
    let mut acc = vec![0.0; m];
    let mut best = 0.0f64;
    for &i in order {
        for (a, x) in acc.iter_mut().zip(&vectors[i]) {
            *a += x;
        }
        best = acc.iter().fold(best, |b, x| b.max(x.abs()));
    }
    best
}

/// The zero-sum family in `ℝ^{k²}` attached to `k` orthonormal vectors:
/// per coordinate `i`, the entries `|uᵢˡ|² − 1/N` followed by
/// `Re(uᵢˡ ūᵢᵖ)` and `Im(uᵢˡ ūᵢᵖ)` for `l < p`.
pub fn zero_sum_family(columns: &[Vec<Complex64>]) -> Result<Vec<Vec<f64>>> {
    let k = columns.len();
    let n = columns.first().map_or(0, Vec::len);
    if k == 0 || n == 0 || columns.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidDimension("need equal-length nonempty columns".into()));
    }
    let inv = 1.0 / n as f64;
    Ok((0..n)
        .map(|i| {
            let mut v = Vec::with_capacity(k * k);
            for c in columns {
                v.push(c[i].norm_sqr() - inv);
            }
            for l in 0..k {
                for p in l + 1..k {
                    let z = columns[l][i] * columns[p][i].conj();
                    v.push(z.re);
                    v.push(z.im);
                }
            }
            v
        })
        .collect())
}
