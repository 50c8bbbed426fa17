//! Dense Hermitian eigensolver, resolvent bilinear forms, the `Ξ` matrix and
//! the top of the deformed spectrum.

mod eigh;
mod matrix;
mod ql;
mod tridiag;

pub use eigh::{eigh, eigh_projected, eigvalsh, EigDecomp, EigVectors, SpectralProjection};
pub use matrix::{Beta, DenseHermitian};

use crate::deformation::{Frame, SpikeSpec};
use crate::ensemble::WignerSample;
use crate::{theory, Complex64, Error, Result};

/// Shifts closer than this to an eigenvalue are rejected.
pub const NEAR_SINGULAR: f64 = 1e-8;

/// `⟨u, (z − A)⁻¹ v⟩` from an eigendecomposition carrying vectors.
pub fn resolvent_quadform(eig: &EigDecomp, z: Complex64, u: &[Complex64], v: &[Complex64]) -> Result<Complex64> {
    let cu = eig.coefficients(u)?;
    let cv = eig.coefficients(v)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &lam) in eig.values().iter().enumerate() {
        let d = z - lam;
        if d.norm() < NEAR_SINGULAR {
            return Err(Error::NearSingularShift(z));
        }
        acc += cu[k].conj() * cv[k] / d;
    }
    Ok(acc)
}

/// The `k × k` matrix `√N(⟨uˡ, R(ρ_θ) uᵖ⟩ − δ_{lp}/θ)`, Hermitized.
#[derive(Debug, Clone, PartialEq)]
pub struct XiMatrix {
    entries: Vec<Complex64>,
    k: usize,
    pub theta: f64,
    pub rho: f64,
}

impl XiMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, l: usize, p: usize) -> Complex64 {
        self.entries[l * self.k + p]
    }

    /// Largest imaginary part of any entry.
    pub fn max_imag(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// Eigenvalues `y₁ ≥ … ≥ y_k`.
    pub fn eigenvalues_desc(&self) -> Result<Vec<f64>> {
        let mut m = DenseHermitian::zeros(self.k, Beta::Complex);
        for l in 0..self.k {
            for p in l..self.k {
                m.set(l, p, self.get(l, p));
            }
        }
        let mut v = eigvalsh(&m)?;
        v.reverse();
        Ok(v)
    }
}

/// Builds `Ξ` from the spectral data of `X_N` and the spike's frame.
pub fn xi_matrix(eig: &EigDecomp, frame: &Frame, theta: f64, sigma: f64) -> Result<XiMatrix> {
    let proj = eig.project(frame.columns())?;
    xi_from_projection(&proj, theta, sigma)
}

/// As [`xi_matrix`], from a projection whose probes are the frame columns.
pub fn xi_from_projection(proj: &SpectralProjection, theta: f64, sigma: f64) -> Result<XiMatrix> {
    let rho = theory::outlier_location(theta, sigma)?.ok_or(Error::BelowPhaseTransition { theta, sigma })?;
    let k = proj.probes();
    let root = (proj.values().len() as f64).sqrt();
    let z = Complex64::new(rho, 0.0);
    let mut raw = vec![Complex64::new(0.0, 0.0); k * k];
    for l in 0..k {
        for p in 0..k {
            let delta = if l == p { 1.0 / theta } else { 0.0 };
            raw[l * k + p] = (proj.resolvent(l, p, z)? - delta) * root;
        }
    }
    let mut entries = raw.clone();
    for l in 0..k {
        for p in 0..k {
            entries[l * k + p] = 0.5 * (raw[l * k + p] + raw[p * k + l].conj());
        }
    }
    Ok(XiMatrix { entries, k, theta, rho })
}

/// `X + Σ_j θ_j U_j U_j*` assembled densely.
pub fn deformed_matrix(x: &DenseHermitian, spec: &SpikeSpec, frames: &[Frame]) -> Result<DenseHermitian> {
    let n = x.n();
    if frames.len() != spec.spikes().len() {
        return Err(Error::InvalidFrame(format!(
            "{} frames for {} spikes",
            frames.len(),
            spec.spikes().len()
        )));
    }
    let mut out = x.clone();
    for (spike, frame) in spec.spikes().iter().zip(frames) {
        if frame.n() != n {
            return Err(Error::InvalidDimension(format!("frame of length {} for n = {n}", frame.n())));
        }
        for u in frame.columns() {
            for i in 0..n {
                let a = spike.theta * u[i];
                if a == 0.0 {
                    continue;
                }
                for j in i..n {
                    if u[j] != 0.0 {
                        out.set(i, j, out.get(i, j) + a * u[j]);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Top `k` eigenvalues (descending) of `X_N + A_N`.
pub fn deformed_topk(x: &WignerSample, spec: &SpikeSpec, k: usize) -> Result<Vec<f64>> {
    if k > x.n {
        return Err(Error::InvalidDimension(format!("k = {k} exceeds n = {}", x.n)));
    }
    let frames = spec.build_frames(x.n)?;
    let m = deformed_matrix(&x.matrix, spec, &frames)?;
    let mut values = eigvalsh(&m)?;
    values.reverse();
    values.truncate(k);
    Ok(values)
}
