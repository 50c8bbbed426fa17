use super::matrix::{Beta, DenseHermitian};
use super::ql::{implicit_ql, rotate_rows};
use super::tridiag::{tridiagonalize_complex, tridiagonalize_real};
use crate::{Complex64, Error, Result};

/// Orthonormal eigenvectors, one per row, in the order of [`EigDecomp::values`].
#[derive(Debug, Clone, PartialEq)]
pub enum EigVectors {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Eigenvalues in ascending order, optionally with eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigDecomp {
    values: Vec<f64>,
    vectors: Option<EigVectors>,
}

impl EigDecomp {
    /// Ascending eigenvalues.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// The `i`-th largest eigenvalue (`i = 0` is the top), matching the
    /// descending convention `λ₁ ≥ … ≥ λ_N`.
    pub fn descending(&self, i: usize) -> f64 {
        self.values[self.values.len() - 1 - i]
    }

    pub fn top_k(&self, k: usize) -> Vec<f64> {
        self.values.iter().rev().take(k).copied().collect()
    }

    pub fn has_vectors(&self) -> bool {
        self.vectors.is_some()
    }

    pub fn vectors(&self) -> Option<&EigVectors> {
        self.vectors.as_ref()
    }

    /// Eigenvector belonging to `values()[k]`.
    pub fn vector(&self, k: usize) -> Option<Vec<Complex64>> {
        let n = self.n();
        match self.vectors.as_ref()? {
            EigVectors::Real(v) => Some(v[k * n..(k + 1) * n].iter().map(|&x| Complex64::new(x, 0.0)).collect()),
            EigVectors::Complex(v) => Some(v[k * n..(k + 1) * n].to_vec()),
        }
    }

    /// Expansion coefficients `⟨q_k, u⟩` of `u` in the eigenbasis.
    pub fn coefficients(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n();
        if u.len() != n {
            return Err(Error::InvalidDimension(format!("vector of length {} for n = {n}", u.len())));
        }
        let vecs = self
            .vectors
            .as_ref()
            .ok_or_else(|| Error::InvalidMatrix("decomposition was computed without eigenvectors".into()))?;
        Ok((0..n)
            .map(|k| match vecs {
                EigVectors::Real(v) => v[k * n..(k + 1) * n].iter().zip(u).map(|(&q, &x)| x * q).sum(),
                EigVectors::Complex(v) => v[k * n..(k + 1) * n].iter().zip(u).map(|(q, &x)| q.conj() * x).sum(),
            })
            .collect())
    }

    /// Projects a set of probe vectors onto the eigenbasis.
    pub fn project(&self, probes: &[Vec<f64>]) -> Result<SpectralProjection> {
        let coeffs = probes
            .iter()
            .map(|u| {
                let uc: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                self.coefficients(&uc)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralProjection {
            values: self.values.clone(),
            coeffs,
        })
    }
}

/// Eigenvalues together with the eigenbasis coefficients of a few fixed
/// probe vectors. This is all that resolvent bilinear forms and
/// `⟨uˡ, f(A) uᵖ⟩` need, at O(n²) cost per probe instead of forming every
/// eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProjection {
    values: Vec<f64>,
    /// `coeffs[l][k] = ⟨q_k, u_l⟩`.
    coeffs: Vec<Vec<Complex64>>,
}

impl SpectralProjection {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficients(&self, l: usize) -> &[Complex64] {
        &self.coeffs[l]
    }

    /// Distance from `z` to the nearest eigenvalue.
    pub fn distance_to_spectrum(&self, z: Complex64) -> f64 {
        self.values.iter().map(|&x| (z - x).norm()).fold(f64::INFINITY, f64::min)
    }

    /// `⟨u_l, (z − A)⁻¹ u_p⟩`.
    pub fn resolvent(&self, l: usize, p: usize, z: Complex64) -> Result<Complex64> {
        if self.distance_to_spectrum(z) < super::NEAR_SINGULAR {
            return Err(Error::NearSingularShift(z));
        }
        Ok(self
            .values
            .iter()
            .zip(self.coeffs[l].iter().zip(&self.coeffs[p]))
            .map(|(&lam, (a, b))| a.conj() * b / (z - lam))
            .sum())
    }

    /// `⟨u_l, f(A) u_p⟩` for a real function applied to the spectrum.
    pub fn apply_fn(&self, l: usize, p: usize, f: impl Fn(f64) -> f64) -> Complex64 {
        self.values
            .iter()
            .zip(self.coeffs[l].iter().zip(&self.coeffs[p]))
            .map(|(&lam, (a, b))| a.conj() * b * f(lam))
            .sum()
    }
}

fn check(a: &DenseHermitian) -> Result<()> {
    if a.n() == 0 {
        return Err(Error::InvalidDimension("matrix must be at least 1x1".into()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entries".into()));
    }
    Ok(())
}

fn sort_ascending<T: Copy>(values: &mut Vec<f64>, rows: Option<(&mut Vec<T>, usize)>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    if let Some((buf, width)) = rows {
        let mut out = Vec::with_capacity(buf.len());
        for &i in &order {
            out.extend_from_slice(&buf[i * width..(i + 1) * width]);
        }
        *buf = out;
    }
    *values = sorted;
}

/// Full eigendecomposition of a real symmetric or Hermitian matrix.
///
/// Householder reduction to a real tridiagonal matrix followed by
/// implicit-shift QL. Eigenvalues come back in ascending order; ties keep
/// the order produced by the iteration (stable sort).
pub fn eigh(a: &DenseHermitian, want_vectors: bool) -> Result<EigDecomp> {
    check(a)?;
    let n = a.n();
    match a.beta() {
        Beta::Real => {
            let mut red = tridiagonalize_real(a.unpack_real().expect("real storage"), n);
            let mut d = std::mem::take(&mut red.diag);
            let mut e = std::mem::take(&mut red.offdiag);
            if !want_vectors {
                implicit_ql(&mut d, &mut e, |_, _, _| {})?;
                sort_ascending::<f64>(&mut d, None);
                return Ok(EigDecomp { values: d, vectors: None });
            }
            // F = Qᵀ, then F ← Zᵀ F; row k ends as eigenvector k
            let mut f = identity_real(n);
            red.apply_qt(&mut f, n);
            implicit_ql(&mut d, &mut e, |i, c, s| rotate_rows(&mut f, n, i, c, s))?;
            sort_ascending(&mut d, Some((&mut f, n)));
            Ok(EigDecomp {
                values: d,
                vectors: Some(EigVectors::Real(f)),
            })
        }
        Beta::Complex => {
            let mut red = tridiagonalize_complex(a.unpack_complex().expect("complex storage"), n);
            let mut d = std::mem::take(&mut red.diag);
            let mut e = std::mem::take(&mut red.offdiag);
            if !want_vectors {
                implicit_ql(&mut d, &mut e, |_, _, _| {})?;
                sort_ascending::<f64>(&mut d, None);
                return Ok(EigDecomp { values: d, vectors: None });
            }
            let mut f = vec![Complex64::new(0.0, 0.0); n * n];
            for i in 0..n {
                f[i * n + i] = Complex64::new(1.0, 0.0);
            }
            red.apply_qh(&mut f, n);
            implicit_ql(&mut d, &mut e, |i, c, s| rotate_rows(&mut f, n, i, c, s))?;
            sort_ascending(&mut d, Some((&mut f, n)));
            // rows of F = Eᴴ are conjugated eigenvectors
            for x in f.iter_mut() {
                *x = x.conj();
            }
            Ok(EigDecomp {
                values: d,
                vectors: Some(EigVectors::Complex(f)),
            })
        }
    }
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(a: &DenseHermitian) -> Result<Vec<f64>> {
    Ok(eigh(a, false)?.values)
}

/// Eigenvalues plus the eigenbasis coefficients of real probe vectors,
/// without forming the eigenvectors.
pub fn eigh_projected(a: &DenseHermitian, probes: &[Vec<f64>]) -> Result<SpectralProjection> {
    check(a)?;
    let n = a.n();
    let width = probes.len();
    for u in probes {
        if u.len() != n {
            return Err(Error::InvalidDimension(format!("probe of length {} for n = {n}", u.len())));
        }
    }
    let (values, block): (Vec<f64>, Vec<Complex64>) = match a.beta() {
        Beta::Real => {
            let red = tridiagonalize_real(a.unpack_real().expect("real storage"), n);
            let mut y = vec![0.0; n * width];
            for (l, u) in probes.iter().enumerate() {
                for i in 0..n {
                    y[i * width + l] = u[i];
                }
            }
            red.apply_qt(&mut y, width);
            let (mut d, mut e) = (red.diag, red.offdiag);
            if width > 0 {
                implicit_ql(&mut d, &mut e, |i, c, s| rotate_rows(&mut y, width, i, c, s))?;
            } else {
                implicit_ql(&mut d, &mut e, |_, _, _| {})?;
            }
            sort_ascending(&mut d, Some((&mut y, width)));
            (d, y.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
        }
        Beta::Complex => {
            let red = tridiagonalize_complex(a.unpack_complex().expect("complex storage"), n);
            let mut y = vec![Complex64::new(0.0, 0.0); n * width];
            for (l, u) in probes.iter().enumerate() {
                for i in 0..n {
                    y[i * width + l] = Complex64::new(u[i], 0.0);
                }
            }
            red.apply_qh(&mut y, width);
            let (mut d, mut e) = (red.diag, red.offdiag);
            if width > 0 {
                implicit_ql(&mut d, &mut e, |i, c, s| rotate_rows(&mut y, width, i, c, s))?;
            } else {
                implicit_ql(&mut d, &mut e, |_, _, _| {})?;
            }
            sort_ascending(&mut d, Some((&mut y, width)));
            (d, y)
        }
    };
    let coeffs = (0..width).map(|l| (0..n).map(|k| block[k * width + l]).collect()).collect();
    Ok(SpectralProjection { values, coeffs })
}

fn identity_real(n: usize) -> Vec<f64> {
    let mut f = vec![0.0; n * n];
    for i in 0..n {
        f[i * n + i] = 1.0;
    }
    f
}
