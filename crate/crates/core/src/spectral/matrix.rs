use crate::{Complex64, Error, Result};

/// Symmetry class of a matrix: β = 1 real symmetric, β = 2 complex Hermitian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Beta {
    Real,
    Complex,
}

impl Beta {
    pub fn value(self) -> u8 {
        match self {
            Beta::Real => 1,
            Beta::Complex => 2,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    /// The real-vs-complex indicator of the fluctuation covariances: 1 for β = 1, 0 for β = 2.
    pub fn real_indicator(self) -> f64 {
        match self {
            Beta::Real => 1.0,
            Beta::Complex => 0.0,
        }
    }
}

impl TryFrom<u8> for Beta {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Beta::Real),
            2 => Ok(Beta::Complex),
            other => Err(Error::InvalidSymmetryClass(other)),
        }
    }
}

impl From<Beta> for u8 {
    fn from(b: Beta) -> u8 {
        b.value()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Packed {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// An `n × n` real symmetric or complex Hermitian matrix.
///
/// Only the upper triangle (row-major, diagonal included) is stored, so the
/// matrix equals its conjugate transpose by construction. Writing a
/// diagonal entry of a Hermitian matrix discards its imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    n: usize,
    data: Packed,
}

impl DenseHermitian {
    pub fn zeros(n: usize, beta: Beta) -> Self {
        let len = n * (n + 1) / 2;
        let data = match beta {
            Beta::Real => Packed::Real(vec![0.0; len]),
            Beta::Complex => Packed::Complex(vec![Complex64::new(0.0, 0.0); len]),
        };
        DenseHermitian { n, data }
    }

    /// Builds a real symmetric matrix from a full row-major array, reading the upper triangle.
    pub fn from_real_rows(n: usize, full: &[f64]) -> Result<Self> {
        if full.len() != n * n {
            return Err(Error::InvalidDimension(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                full.len()
            )));
        }
        let mut m = DenseHermitian::zeros(n, Beta::Real);
        for i in 0..n {
            for j in i..n {
                m.set_real(i, j, full[i * n + j]);
            }
        }
        Ok(m)
    }

    /// Builds a Hermitian matrix from a full row-major array, reading the upper triangle.
    pub fn from_complex_rows(n: usize, full: &[Complex64]) -> Result<Self> {
        if full.len() != n * n {
            return Err(Error::InvalidDimension(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                full.len()
            )));
        }
        let mut m = DenseHermitian::zeros(n, Beta::Complex);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, full[i * n + j]);
            }
        }
        Ok(m)
    }

    pub fn identity(n: usize, beta: Beta) -> Self {
        let mut m = DenseHermitian::zeros(n, beta);
        for i in 0..n {
            m.set_real(i, i, 1.0);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> Beta {
        match self.data {
            Packed::Real(_) => Beta::Real,
            Packed::Complex(_) => Beta::Complex,
        }
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.n);
        // rows 0..i hold n, n-1, ..., n-i+1 entries
        i * self.n - (i * i.saturating_sub(1)) / 2 + (j - i)
    }

    /// Entry `(i, j)` of the full matrix.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (a, b, conj) = if i <= j { (i, j, false) } else { (j, i, true) };
        let k = self.index(a, b);
        let v = match &self.data {
            Packed::Real(d) => Complex64::new(d[k], 0.0),
            Packed::Complex(d) => d[k],
        };
        if conj {
            v.conj()
        } else {
            v
        }
    }

    /// Sets entry `(i, j)` and, implicitly, its mirror.
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let (a, b, v) = if i <= j { (i, j, v) } else { (j, i, v.conj()) };
        let k = self.index(a, b);
        match &mut self.data {
            Packed::Real(d) => d[k] = v.re,
            Packed::Complex(d) => d[k] = if a == b { Complex64::new(v.re, 0.0) } else { v },
        }
    }

    pub fn set_real(&mut self, i: usize, j: usize, v: f64) {
        self.set(i, j, Complex64::new(v, 0.0));
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        match &self.data {
            Packed::Real(d) => d.iter().fold(0.0, |m, x| m.max(x.abs())),
            Packed::Complex(d) => d.iter().fold(0.0, |m, x| m.max(x.norm())),
        }
    }

    pub fn is_finite(&self) -> bool {
        match &self.data {
            Packed::Real(d) => d.iter().all(|x| x.is_finite()),
            Packed::Complex(d) => d.iter().all(|x| x.re.is_finite() && x.im.is_finite()),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).re).sum()
    }

    /// Packed upper triangle of a real matrix.
    pub fn real_packed(&self) -> Option<&[f64]> {
        match &self.data {
            Packed::Real(d) => Some(d),
            Packed::Complex(_) => None,
        }
    }

    pub fn complex_packed(&self) -> Option<&[Complex64]> {
        match &self.data {
            Packed::Real(_) => None,
            Packed::Complex(d) => Some(d),
        }
    }

    pub(crate) fn real_packed_mut(&mut self) -> Option<&mut [f64]> {
        match &mut self.data {
            Packed::Real(d) => Some(d),
            Packed::Complex(_) => None,
        }
    }

    pub(crate) fn complex_packed_mut(&mut self) -> Option<&mut [Complex64]> {
        match &mut self.data {
            Packed::Real(_) => None,
            Packed::Complex(d) => Some(d),
        }
    }

    /// Matrix-vector product `A x`.
    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n {
            return Err(Error::InvalidDimension(format!(
                "vector of length {} for an {}x{} matrix",
                x.len(),
                self.n,
                self.n
            )));
        }
        let n = self.n;
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            y[i] += self.get(i, i) * x[i];
            for j in i + 1..n {
                let a = self.get(i, j);
                y[i] += a * x[j];
                y[j] += a.conj() * x[i];
            }
        }
        Ok(y)
    }

    /// Upper triangle unpacked into a full row-major `n × n` buffer (lower part left zero).
    pub(crate) fn unpack_real(&self) -> Option<Vec<f64>> {
        let d = self.real_packed()?;
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            let s = self.index(i, i);
            a[i * n + i..i * n + n].copy_from_slice(&d[s..s + n - i]);
        }
        Some(a)
    }

    pub(crate) fn unpack_complex(&self) -> Option<Vec<Complex64>> {
        let d = self.complex_packed()?;
        let n = self.n;
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let s = self.index(i, i);
            a[i * n + i..i * n + n].copy_from_slice(&d[s..s + n - i]);
        }
        Some(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_indexing_round_trips() {
        let n = 7;
        let mut m = DenseHermitian::zeros(n, Beta::Complex);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, Complex64::new((i * 10 + j) as f64, if i == j { 0.0 } else { 1.0 }));
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert_eq!(m.get(i, j), m.get(j, i).conj());
            }
            for j in i..n {
                assert_eq!(m.get(i, j).re, (i * 10 + j) as f64);
            }
        }
        assert_eq!(m.complex_packed().unwrap().len(), n * (n + 1) / 2);
    }

    #[test]
    fn hermitian_diagonal_is_real() {
        let mut m = DenseHermitian::zeros(2, Beta::Complex);
        m.set(1, 1, Complex64::new(2.0, 5.0));
        assert_eq!(m.get(1, 1), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn beta_rejects_other_values() {
        assert_eq!(Beta::try_from(3), Err(Error::InvalidSymmetryClass(3)));
    }
}
