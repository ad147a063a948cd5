//! Dense complex Hermitian linear algebra for small (user-count sized)
//! systems.
//!
//! Every rate computation in this crate reduces to factoring a K-by-K
//! Hermitian positive-definite matrix, where K is the number of users —
//! typically 2..8, never more than a few dozen.  A hand-rolled Cholesky
//! kernel over a flat row-major buffer is both faster and easier to audit
//! than pulling in a general-purpose linear-algebra stack for matrices
//! this small.

use crate::error::{Error, Result};
use num_complex::Complex64;

// ---------------------------------------------------------------------------
// Matrix storage
// ---------------------------------------------------------------------------

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<Complex64>,
}

impl CMat {
    /// All-zero n-by-n matrix.
    pub fn zeros(n: usize) -> Self {
        CMat {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// Identity matrix of order n.
    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Matrix order.
    pub fn order(&self) -> usize {
        self.n
    }

    /// Entry (i, j).
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    /// Mutable entry (i, j).
    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }

    /// Row `i` as a slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Maximum absolute column sum (the induced 1-norm).
    pub fn one_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.n {
            let mut col = 0.0;
            for i in 0..self.n {
                col += self.at(i, j).norm();
            }
            best = best.max(col);
        }
        best
    }

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

// ---------------------------------------------------------------------------
// Cholesky factorization
// ---------------------------------------------------------------------------

/// Lower-triangular Cholesky factor of a Hermitian positive-definite
/// matrix: `A = L L^H` with real positive diagonal.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    /// Row-major lower triangle; entries above the diagonal are zero.
    l: Vec<Complex64>,
}

/// Factor a Hermitian positive-definite matrix.
///
/// Only the lower triangle of `a` is read; the strict upper triangle is
/// assumed to mirror it conjugately.  Returns a numeric error when a pivot
/// is non-positive or non-finite, which is how rank deficiency of a Gram
/// matrix manifests here.
pub fn cholesky(a: &CMat) -> Result<Cholesky> {
    let n = a.order();
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            // Accumulate the inner product of rows i and j of L.
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..j {
                s += l[i * n + k] * l[j * n + k].conj();
            }
            if i == j {
                let d = a.at(i, i).re - s.re;
                if !(d.is_finite() && d > 0.0) {
                    return Err(Error::Numeric(format!(
                        "Cholesky pivot {i} is not positive (value {d:.3e}); \
                         matrix is not positive definite"
                    )));
                }
                l[i * n + i] = Complex64::new(d.sqrt(), 0.0);
            } else {
                l[i * n + j] = (a.at(i, j) - s) / l[j * n + j].re;
            }
        }
    }
    Ok(Cholesky { n, l })
}

impl Cholesky {
    /// Matrix order.
    pub fn order(&self) -> usize {
        self.n
    }

    /// Diagonal entry `L[i][i]` (real and positive by construction).
    #[inline]
    pub fn diag(&self, i: usize) -> f64 {
        self.l[i * self.n + i].re
    }

    /// Base-2 log determinant of the factored matrix:
    /// `log2 det(A) = 2 * sum_i log2 L[i][i]`.
    pub fn log2_det(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            acc += self.diag(i).log2();
        }
        2.0 * acc
    }

    /// Solve `L y = b` in place (forward substitution).
    pub fn forward_solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.diag(i);
        }
    }

    /// Solve `L^H x = y` in place (backward substitution).
    pub fn backward_solve_in_place(&self, y: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(y.len(), n);
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i].conj() * y[k];
            }
            y[i] = s / self.diag(i);
        }
    }

    /// Solve `A x = b` in place using both triangular sweeps.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        self.forward_solve_in_place(b);
        self.backward_solve_in_place(b);
    }

    /// Explicit lower-triangular inverse `T = L^{-1}`.
    pub fn lower_inverse(&self) -> CMat {
        let n = self.n;
        let mut t = CMat::zeros(n);
        for i in 0..n {
            *t.at_mut(i, i) = Complex64::new(1.0 / self.diag(i), 0.0);
            for j in 0..i {
                let mut s = Complex64::new(0.0, 0.0);
                for k in j..i {
                    s += self.l[i * n + k] * t.at(k, j);
                }
                *t.at_mut(i, j) = -s / self.diag(i);
            }
        }
        t
    }

    /// Explicit inverse of the factored matrix: `A^{-1} = T^H T`.
    pub fn inverse(&self) -> CMat {
        let t = self.lower_inverse();
        let n = self.n;
        let mut inv = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                // T is lower triangular: rows k < max(i, j) contribute zero.
                for k in i.max(j)..n {
                    s += t.at(k, i).conj() * t.at(k, j);
                }
                *inv.at_mut(i, j) = s;
            }
        }
        inv
    }

    /// Diagonal of the inverse without forming it fully:
    /// `[A^{-1}]_{ii} = || T e_i ||^2` where `T = L^{-1}`.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let t = self.lower_inverse();
        let n = self.n;
        (0..n)
            .map(|i| (i..n).map(|k| t.at(k, i).norm_sqr()).sum())
            .collect()
    }
}

/// Exact 1-norm condition number `‖A‖₁ · ‖A^{-1}‖₁` of a factored matrix.
///
/// For the user-count sized systems handled here the explicit inverse is
/// cheap, so this is the true induced-1-norm condition number rather than
/// a probe-vector estimate.  It upper-bounds the spectral condition number
/// to within a factor of the matrix order.
pub fn one_norm_condition(a: &CMat, factor: &Cholesky) -> f64 {
    a.one_norm() * factor.inverse().one_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TOL: f64 = 1.0e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// A fixed 3x3 Hermitian positive-definite test matrix.
    fn sample_hpd() -> CMat {
        let mut a = CMat::zeros(3);
        *a.at_mut(0, 0) = c(4.0, 0.0);
        *a.at_mut(1, 1) = c(5.0, 0.0);
        *a.at_mut(2, 2) = c(6.0, 0.0);
        *a.at_mut(1, 0) = c(1.0, 1.0);
        *a.at_mut(0, 1) = c(1.0, -1.0);
        *a.at_mut(2, 0) = c(0.5, -0.25);
        *a.at_mut(0, 2) = c(0.5, 0.25);
        *a.at_mut(2, 1) = c(-1.0, 0.5);
        *a.at_mut(1, 2) = c(-1.0, -0.5);
        a
    }

    fn matmul(a: &CMat, b: &CMat) -> CMat {
        let n = a.order();
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = c(0.0, 0.0);
                for k in 0..n {
                    s += a.at(i, k) * b.at(k, j);
                }
                *out.at_mut(i, j) = s;
            }
        }
        out
    }

    #[test]
    fn identity_factors_to_identity() {
        let f = cholesky(&CMat::identity(4)).unwrap();
        for i in 0..4 {
            assert_relative_eq!(f.diag(i), 1.0, epsilon = TOL);
        }
        assert_relative_eq!(f.log2_det(), 0.0, epsilon = TOL);
    }

    #[test]
    fn factor_reconstructs_the_matrix() {
        let a = sample_hpd();
        let f = cholesky(&a).unwrap();
        // Rebuild L L^H and compare entrywise.
        let n = a.order();
        for i in 0..n {
            for j in 0..n {
                let mut s = c(0.0, 0.0);
                for k in 0..=i.min(j) {
                    s += f.l[i * n + k] * f.l[j * n + k].conj();
                }
                assert_relative_eq!(s.re, a.at(i, j).re, epsilon = 1.0e-12);
                assert_relative_eq!(s.im, a.at(i, j).im, epsilon = 1.0e-12);
            }
        }
    }

    #[test]
    fn log2_det_matches_diagonal_case() {
        let mut a = CMat::zeros(3);
        *a.at_mut(0, 0) = c(2.0, 0.0);
        *a.at_mut(1, 1) = c(8.0, 0.0);
        *a.at_mut(2, 2) = c(0.5, 0.0);
        let f = cholesky(&a).unwrap();
        // det = 2 * 8 * 0.5 = 8, so log2 det = 3.
        assert_relative_eq!(f.log2_det(), 3.0, epsilon = TOL);
    }

    #[test]
    fn solve_recovers_known_vector() {
        let a = sample_hpd();
        let f = cholesky(&a).unwrap();
        let x_true = [c(1.0, -2.0), c(0.5, 0.25), c(-3.0, 1.0)];
        // b = A x
        let mut b = [c(0.0, 0.0); 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i] += a.at(i, j) * x_true[j];
            }
        }
        f.solve_in_place(&mut b);
        for i in 0..3 {
            assert_relative_eq!(b[i].re, x_true[i].re, epsilon = 1.0e-10);
            assert_relative_eq!(b[i].im, x_true[i].im, epsilon = 1.0e-10);
        }
    }

    #[test]
    fn inverse_multiplies_to_identity() {
        let a = sample_hpd();
        let inv = cholesky(&a).unwrap().inverse();
        let prod = matmul(&a, &inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(prod.at(i, j).re, want, epsilon = 1.0e-10);
                assert_relative_eq!(prod.at(i, j).im, 0.0, epsilon = 1.0e-10);
            }
        }
    }

    #[test]
    fn inverse_diagonal_agrees_with_full_inverse() {
        let a = sample_hpd();
        let f = cholesky(&a).unwrap();
        let full = f.inverse();
        let diag = f.inverse_diagonal();
        for i in 0..3 {
            assert_relative_eq!(diag[i], full.at(i, i).re, epsilon = 1.0e-12);
        }
    }

    #[test]
    fn non_positive_definite_is_rejected() {
        let mut a = CMat::zeros(2);
        *a.at_mut(0, 0) = c(1.0, 0.0);
        *a.at_mut(1, 1) = c(1.0, 0.0);
        *a.at_mut(1, 0) = c(2.0, 0.0); // |off-diag| > diag => indefinite
        *a.at_mut(0, 1) = c(2.0, 0.0);
        assert!(cholesky(&a).is_err());
    }

    #[test]
    fn one_norm_condition_of_identity_is_one() {
        let a = CMat::identity(5);
        let f = cholesky(&a).unwrap();
        assert_relative_eq!(one_norm_condition(&a, &f), 1.0, epsilon = TOL);
    }

    #[test]
    fn one_norm_condition_grows_with_scale_spread() {
        let mut a = CMat::zeros(2);
        *a.at_mut(0, 0) = c(1.0e6, 0.0);
        *a.at_mut(1, 1) = c(1.0e-6, 0.0);
        let f = cholesky(&a).unwrap();
        assert_relative_eq!(one_norm_condition(&a, &f), 1.0e12, epsilon = 1.0);
    }
}
