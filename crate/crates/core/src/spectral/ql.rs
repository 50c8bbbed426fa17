//! Implicit-shift QL iteration for a real symmetric tridiagonal matrix.

use crate::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Diagonalizes the tridiagonal matrix in place; `diag` ends up holding the
/// (unsorted) eigenvalues. Every plane rotation is reported to `rotate` as
/// `(i, c, s)`, meaning rows `i` and `i + 1` of any tracked block must be
/// replaced by `c·rᵢ − s·rᵢ₊₁` and `s·rᵢ + c·rᵢ₊₁`.
pub(crate) fn implicit_ql(diag: &mut [f64], offdiag: &mut [f64], mut rotate: impl FnMut(usize, f64, f64)) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    offdiag[n - 1] = 0.0;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if offdiag[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NoConvergence);
            }
            // Wilkinson-style shift from the leading 2x2 block
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * offdiag[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + offdiag[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * offdiag[i];
                let b = c * offdiag[i];
                r = f.hypot(g);
                offdiag[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    offdiag[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                rotate(i, c, s);
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            offdiag[l] = g;
            offdiag[m] = 0.0;
        }
    }
    Ok(())
}

/// Applies a reported rotation to rows `i`, `i + 1` of a row-major block.
#[inline]
pub(crate) fn rotate_rows<T>(buf: &mut [T], width: usize, i: usize, c: f64, s: f64)
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    let (lo, hi) = buf[i * width..(i + 2) * width].split_at_mut(width);
    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = x * c - y * s;
        *b = x * s + y * c;
    }
}
