//! Householder reduction of a symmetric/Hermitian matrix to real tridiagonal form.
//!
//! The working matrix is a full row-major `n × n` buffer of which only the
//! upper triangle is read or written. Step `k` builds a reflector from the
//! tail of row `k` and stores it there (with an explicit leading 1). The
//! trailing rank-2 update of step `k` is fused with the symmetric
//! matrix-vector product needed by step `k + 1`, so each step sweeps the
//! trailing triangle once.

use crate::Complex64;

/// Output of a reduction `A = Q T Qᴴ` with `T` real symmetric tridiagonal.
pub(crate) struct Reduction<S> {
    pub diag: Vec<f64>,
    /// `offdiag[i]` couples `i` and `i + 1`; the last entry is zero.
    pub offdiag: Vec<f64>,
    /// Working buffer; row `k` holds reflector `k` in columns `k+1..n`.
    pub work: Vec<S>,
    pub taus: Vec<S>,
    pub n: usize,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for t in 0..8 {
            acc[t] += x[t] * y[t];
        }
    }
    let mut s = acc.iter().sum::<f64>();
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Real Householder vector: on exit `x = v` with `v[0] = 1` and
/// `(I - tau v vᵀ) x_in = beta e₁`.
fn reflector_real(x: &mut [f64]) -> (f64, f64) {
    let alpha = x[0];
    let xnorm = dot(&x[1..], &x[1..]).sqrt();
    if xnorm == 0.0 {
        x[0] = 1.0;
        return (0.0, alpha);
    }
    let beta = if alpha >= 0.0 { -alpha.hypot(xnorm) } else { alpha.hypot(xnorm) };
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for v in &mut x[1..] {
        *v *= scale;
    }
    x[0] = 1.0;
    (tau, beta)
}

/// Complex Householder vector with a real `beta`: `(I - tau v vᴴ)ᴴ x_in = beta e₁`.
fn reflector_complex(x: &mut [Complex64]) -> (Complex64, f64) {
    let alpha = x[0];
    let xnorm = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if xnorm == 0.0 && alpha.im == 0.0 {
        x[0] = Complex64::new(1.0, 0.0);
        return (Complex64::new(0.0, 0.0), alpha.re);
    }
    let norm = (alpha.norm_sqr() + xnorm * xnorm).sqrt();
    let beta = if alpha.re >= 0.0 { -norm } else { norm };
    let tau = Complex64::new((beta - alpha.re) / beta, -alpha.im / beta);
    let scale = (alpha - beta).inv();
    for v in &mut x[1..] {
        *v *= scale;
    }
    x[0] = Complex64::new(1.0, 0.0);
    (tau, beta)
}

/// Accumulates `p += S v` for the upper-stored symmetric trailing block
/// starting at row/column `start`, where `v` is indexed from `start`.
fn symv_rows(a: &[f64], n: usize, start: usize, v: &[f64], p: &mut [f64]) {
    for i in start..n {
        let row = &a[i * n + i..i * n + n];
        let vl = &v[i - start..];
        let vi = vl[0];
        let s = row[0] * vi + dot(&row[1..], &vl[1..]);
        p[i] += s;
        axpy(vi, &row[1..], &mut p[i + 1..n]);
    }
}

pub(crate) fn tridiagonalize_real(mut a: Vec<f64>, n: usize) -> Reduction<f64> {
    let mut diag = vec![0.0; n];
    let mut offdiag = vec![0.0; n];
    let mut taus = vec![0.0; n.saturating_sub(1)];
    let mut p = vec![0.0; n];
    let mut p_next = vec![0.0; n];
    let mut w = vec![0.0; n];

    if n >= 2 {
        let (tau, beta) = reflector_real(&mut a[1..n]);
        taus[0] = tau;
        offdiag[0] = beta;
        if tau != 0.0 {
            let v0 = a[1..n].to_vec();
            symv_rows(&a, n, 1, &v0, &mut p);
        }
    }

    for k in 0..n {
        diag[k] = a[k * n + k];
        if k + 1 >= n {
            break;
        }
        let tau = taus[k];
        let (head, tail) = a.split_at_mut((k + 1) * n);
        // v is indexed from k+1
        let v = &head[k * n + k + 1..k * n + n];

        if tau != 0.0 {
            let pk = &mut p[k + 1..n];
            for x in pk.iter_mut() {
                *x *= tau;
            }
            let half = -0.5 * tau * dot(pk, v);
            for ((wi, &pi), &vi) in w[k + 1..n].iter_mut().zip(pk.iter()).zip(v) {
                *wi = pi + half * vi;
            }
        }
        let wl = &w[k + 1..n];

        // row k+1 first: it carries the next reflector
        let (row1, rest) = tail.split_at_mut(n);
        if tau != 0.0 {
            let r = &mut row1[k + 1..n];
            let (v0, w0) = (v[0], wl[0]);
            for ((x, &vj), &wj) in r.iter_mut().zip(v).zip(wl) {
                *x -= v0 * wj + w0 * vj;
            }
        }
        let has_next = k + 2 < n;
        let mut tau_next = 0.0;
        if has_next {
            let (t, beta) = reflector_real(&mut row1[k + 2..n]);
            taus[k + 1] = t;
            offdiag[k + 1] = beta;
            tau_next = t;
            p_next[k + 2..n].iter_mut().for_each(|x| *x = 0.0);
        } else {
            offdiag[k + 1] = 0.0;
        }
        let vn = &row1[k + 2..n];
        let accumulate = has_next && tau_next != 0.0;

        for i in k + 2..n {
            let base = (i - k - 2) * n;
            let row = &mut rest[base + i..base + n];
            if tau != 0.0 {
                let off = i - k - 1;
                let (vs, ws) = (&v[off..], &wl[off..]);
                let (vi, wi) = (vs[0], ws[0]);
                for ((x, &vj), &wj) in row.iter_mut().zip(vs).zip(ws) {
                    *x -= vi * wj + wi * vj;
                }
            }
            if accumulate {
                let v2 = &vn[i - k - 2..];
                let v2i = v2[0];
                let s = row[0] * v2i + dot(&row[1..], &v2[1..]);
                p_next[i] += s;
                axpy(v2i, &row[1..], &mut p_next[i + 1..n]);
            }
        }
        std::mem::swap(&mut p, &mut p_next);
    }

    Reduction {
        diag,
        offdiag,
        work: a,
        taus,
        n,
    }
}

fn hemv_rows(a: &[Complex64], n: usize, start: usize, v: &[Complex64], p: &mut [Complex64]) {
    for i in start..n {
        let row = &a[i * n + i..i * n + n];
        let vl = &v[i - start..];
        let vi = vl[0];
        let mut s = row[0] * vi;
        for (x, &vj) in row[1..].iter().zip(&vl[1..]) {
            s += x * vj;
        }
        p[i] += s;
        for (pj, x) in p[i + 1..n].iter_mut().zip(&row[1..]) {
            *pj += x.conj() * vi;
        }
    }
}

pub(crate) fn tridiagonalize_complex(mut a: Vec<Complex64>, n: usize) -> Reduction<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut diag = vec![0.0; n];
    let mut offdiag = vec![0.0; n];
    let mut taus = vec![zero; n.saturating_sub(1)];
    let mut p = vec![zero; n];
    let mut p_next = vec![zero; n];
    let mut w = vec![zero; n];

    // reflectors act on columns; the stored row tail is the conjugated column
    let column_reflector = |row_tail: &mut [Complex64]| {
        for x in row_tail.iter_mut() {
            *x = x.conj();
        }
        reflector_complex(row_tail)
    };

    if n >= 2 {
        let (tau, beta) = column_reflector(&mut a[1..n]);
        taus[0] = tau;
        offdiag[0] = beta;
        if tau != zero {
            let v0 = a[1..n].to_vec();
            hemv_rows(&a, n, 1, &v0, &mut p);
        }
    }

    for k in 0..n {
        diag[k] = a[k * n + k].re;
        if k + 1 >= n {
            break;
        }
        let tau = taus[k];
        let (head, tail) = a.split_at_mut((k + 1) * n);
        let v = &head[k * n + k + 1..k * n + n];

        if tau != zero {
            let pk = &mut p[k + 1..n];
            for x in pk.iter_mut() {
                *x *= tau;
            }
            // alpha = -1/2 tau (pᴴ v)
            let ph_v: Complex64 = pk.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
            let alpha = -0.5 * tau * ph_v;
            for ((wi, &pi), &vi) in w[k + 1..n].iter_mut().zip(pk.iter()).zip(v) {
                *wi = pi + alpha * vi;
            }
        }
        let wl = &w[k + 1..n];

        let (row1, rest) = tail.split_at_mut(n);
        if tau != zero {
            let r = &mut row1[k + 1..n];
            let (v0, w0) = (v[0], wl[0]);
            for ((x, &vj), &wj) in r.iter_mut().zip(v).zip(wl) {
                *x -= v0 * wj.conj() + w0 * vj.conj();
            }
            r[0].im = 0.0;
        }
        let has_next = k + 2 < n;
        let mut tau_next = zero;
        if has_next {
            let (t, beta) = column_reflector(&mut row1[k + 2..n]);
            taus[k + 1] = t;
            offdiag[k + 1] = beta;
            tau_next = t;
            p_next[k + 2..n].iter_mut().for_each(|x| *x = zero);
        } else {
            offdiag[k + 1] = 0.0;
        }
        let vn = &row1[k + 2..n];
        let accumulate = has_next && tau_next != zero;

        for i in k + 2..n {
            let base = (i - k - 2) * n;
            let row = &mut rest[base + i..base + n];
            if tau != zero {
                let off = i - k - 1;
                let (vs, ws) = (&v[off..], &wl[off..]);
                let (vi, wi) = (vs[0], ws[0]);
                for ((x, &vj), &wj) in row.iter_mut().zip(vs).zip(ws) {
                    *x -= vi * wj.conj() + wi * vj.conj();
                }
                row[0].im = 0.0;
            }
            if accumulate {
                let v2 = &vn[i - k - 2..];
                let v2i = v2[0];
                let mut s = row[0] * v2i;
                for (x, &vj) in row[1..].iter().zip(&v2[1..]) {
                    s += x * vj;
                }
                p_next[i] += s;
                for (pj, x) in p_next[i + 1..n].iter_mut().zip(&row[1..]) {
                    *pj += x.conj() * v2i;
                }
            }
        }
        std::mem::swap(&mut p, &mut p_next);
    }

    Reduction {
        diag,
        offdiag,
        work: a,
        taus,
        n,
    }
}

impl Reduction<f64> {
    /// `y ← Qᵀ y` for every column of the row-major `n × width` block `y`.
    pub fn apply_qt(&self, y: &mut [f64], width: usize) {
        let n = self.n;
        let mut r = vec![0.0; width];
        for (k, &tau) in self.taus.iter().enumerate() {
            if tau == 0.0 {
                continue;
            }
            let v = &self.work[k * n + k + 1..k * n + n];
            r.iter_mut().for_each(|x| *x = 0.0);
            for (off, &vi) in v.iter().enumerate() {
                let row = &y[(k + 1 + off) * width..(k + 2 + off) * width];
                axpy(vi, row, &mut r);
            }
            for (off, &vi) in v.iter().enumerate() {
                let row = &mut y[(k + 1 + off) * width..(k + 2 + off) * width];
                axpy(-tau * vi, &r, row);
            }
        }
    }
}

impl Reduction<Complex64> {
    /// `y ← Qᴴ y` for every column of the row-major `n × width` block `y`.
    pub fn apply_qh(&self, y: &mut [Complex64], width: usize) {
        let n = self.n;
        let zero = Complex64::new(0.0, 0.0);
        let mut r = vec![zero; width];
        for (k, &tau) in self.taus.iter().enumerate() {
            if tau == zero {
                continue;
            }
            let tau_c = tau.conj();
            let v = &self.work[k * n + k + 1..k * n + n];
            r.iter_mut().for_each(|x| *x = zero);
            for (off, &vi) in v.iter().enumerate() {
                let row = &y[(k + 1 + off) * width..(k + 2 + off) * width];
                let vc = vi.conj();
                for (rj, &yj) in r.iter_mut().zip(row) {
                    *rj += vc * yj;
                }
            }
            for (off, &vi) in v.iter().enumerate() {
                let row = &mut y[(k + 1 + off) * width..(k + 2 + off) * width];
                let f = tau_c * vi;
                for (yj, &rj) in row.iter_mut().zip(&r) {
                    *yj -= f * rj;
                }
            }
        }
    }
}
