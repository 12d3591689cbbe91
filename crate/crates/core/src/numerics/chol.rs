//! Cholesky factorization of Hermitian positive-definite matrices and the
//! triangular solves built on it. All inner loops run down contiguous
//! column segments of the factor.

use num_complex::Complex64;

use super::mat::{dotc, CMat};
use crate::error::{DdError, Result};

/// Lower-triangular Cholesky factor `L` with `A = L·Lᴴ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: CMat,
}

impl Cholesky {
    /// Factors a Hermitian positive-definite matrix (lower triangle read).
    ///
    /// Fails with a diagnostic naming the offending pivot when the matrix is
    /// numerically not positive definite.
    pub fn factor(a: &CMat) -> Result<Self> {
        assert_eq!(a.nrows(), a.ncols());
        let n = a.nrows();
        let mut l = a.clone();
        for j in 0..n {
            // left-looking update: col_j[j..] -= conj(L[j,k])·col_k[j..], k < j
            for k in 0..j {
                let (ck, cj) = l.col_shared_mut(k, j);
                let s = ck[j].conj();
                if s != Complex64::new(0.0, 0.0) {
                    for (x, w) in ck[j..].iter().zip(cj[j..].iter_mut()) {
                        let re = w.re - (s.re * x.re - s.im * x.im);
                        let im = w.im - (s.re * x.im + s.im * x.re);
                        w.re = re;
                        w.im = im;
                    }
                }
            }
            let d = l.get(j, j).re;
            if d <= 0.0 || !d.is_finite() {
                return Err(DdError::Numeric(format!(
                    "cholesky pivot {j} of {n} is {d:.3e}; matrix not positive definite \
                     (leading diagonal {:.3e})",
                    a.get(0, 0).re
                )));
            }
            let d = d.sqrt();
            let col = l.col_mut(j);
            col[j] = Complex64::new(d, 0.0);
            for v in col[j + 1..].iter_mut() {
                *v /= d;
            }
        }
        // zero the strict upper triangle so the factor is self-contained
        for j in 1..n {
            for i in 0..j {
                l.set(i, j, Complex64::new(0.0, 0.0));
            }
        }
        Ok(Cholesky { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solves `A·x = b` in place via `L·Lᴴ·x = b`.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        // forward, column-oriented: after fixing b[k], eliminate it below
        for k in 0..n {
            let col = self.l.col(k);
            let s = b[k] / col[k].re;
            b[k] = s;
            for (x, w) in col[k + 1..].iter().zip(b[k + 1..].iter_mut()) {
                let re = w.re - (s.re * x.re - s.im * x.im);
                let im = w.im - (s.re * x.im + s.im * x.re);
                w.re = re;
                w.im = im;
            }
        }
        // backward: x[i] = (b[i] - L[i+1.., i]ᴴ·x[i+1..]) / L[i,i]
        for i in (0..n).rev() {
            let col = self.l.col(i);
            let acc = dotc(&col[i + 1..], &b[i + 1..]);
            b[i] = (b[i] - acc) / col[i].re;
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Diagonal of `A⁻¹`, computed column-by-column from `L⁻¹` without
    /// materializing the full inverse.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.dim();
        let mut diag = vec![0.0f64; n];
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            // forward-solve L·w = e_j over the trailing segment
            for v in w[j..].iter_mut() {
                *v = Complex64::new(0.0, 0.0);
            }
            w[j] = Complex64::new(1.0, 0.0);
            for k in j..n {
                let col = self.l.col(k);
                let s = w[k] / col[k].re;
                w[k] = s;
                for (x, u) in col[k + 1..].iter().zip(w[k + 1..].iter_mut()) {
                    let re = u.re - (s.re * x.re - s.im * x.im);
                    let im = u.im - (s.re * x.im + s.im * x.re);
                    u.re = re;
                    u.im = im;
                }
            }
            diag[j] = w[j..].iter().map(|z| z.norm_sqr()).sum();
        }
        diag
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::mat::norm_sqr;

    fn hpd_3x3() -> CMat {
        // A = Bᴴ·B + I for a fixed complex B, guaranteed HPD.
        let mut b = CMat::zeros(3, 3);
        let vals = [
            (0.9, -0.3),
            (0.1, 0.7),
            (-0.5, 0.2),
            (0.3, 0.0),
            (1.1, -0.4),
            (0.0, 0.6),
            (-0.2, -0.2),
            (0.4, 0.1),
            (0.8, 0.5),
        ];
        for (k, &(re, im)) in vals.iter().enumerate() {
            b.set(k % 3, k / 3, Complex64::new(re, im));
        }
        let mut a = b.gram();
        for i in 0..3 {
            let d = a.get(i, i);
            a.set(i, i, d + Complex64::new(1.0, 0.0));
        }
        a
    }

    #[test]
    fn solve_round_trip() {
        let a = hpd_3x3();
        let chol = Cholesky::factor(&a).unwrap();
        let x_true = vec![
            Complex64::new(1.0, -2.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(-3.0, 1.0),
        ];
        let b = a.matvec(&x_true);
        let x = chol.solve(&b);
        let err: f64 = x
            .iter()
            .zip(&x_true)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-12, "solve error {err}");
    }

    #[test]
    fn factor_reconstructs_matrix() {
        let a = hpd_3x3();
        let chol = Cholesky::factor(&a).unwrap();
        // A == L·Lᴴ entrywise
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..3 {
                    acc += chol.l.get(i, k) * chol.l.get(j, k).conj();
                }
                assert!((acc - a.get(i, j)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = CMat::zeros(2, 2);
        a.set(0, 0, Complex64::new(1.0, 0.0));
        a.set(1, 1, Complex64::new(-1.0, 0.0));
        assert!(matches!(Cholesky::factor(&a), Err(DdError::Numeric(_))));
    }

    #[test]
    fn inverse_diagonal_matches_explicit_solves() {
        let a = hpd_3x3();
        let chol = Cholesky::factor(&a).unwrap();
        let diag = chol.inverse_diagonal();
        for j in 0..3 {
            let mut e = vec![Complex64::new(0.0, 0.0); 3];
            e[j] = Complex64::new(1.0, 0.0);
            let x = chol.solve(&e);
            assert!((diag[j] - x[j].re).abs() < 1e-13);
            assert!(x[j].im.abs() < 1e-13);
            assert!(diag[j] > 0.0);
            let _ = norm_sqr(&x);
        }
    }
}
