//! Dense column-major complex matrix and the few BLAS-level kernels the
//! solvers need. Inner loops keep separate real/imaginary accumulators so
//! they autovectorize.

use num_complex::Complex64;

/// Dense complex matrix, column-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    nrows: usize,
    ncols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CMat {
            nrows,
            ncols,
            data: vec![Complex64::new(0.0, 0.0); nrows * ncols],
        }
    }

    pub fn from_columns(nrows: usize, cols: &[&[Complex64]]) -> Self {
        let mut m = CMat::zeros(nrows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), nrows);
            m.col_mut(j).copy_from_slice(c);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.nrows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[j * self.nrows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    /// Shared borrow of column `a` together with a mutable borrow of the
    /// later column `b` (`a < b`).
    #[inline]
    pub fn col_shared_mut(&mut self, a: usize, b: usize) -> (&[Complex64], &mut [Complex64]) {
        debug_assert!(a < b);
        let (lo, hi) = self.data.split_at_mut(b * self.nrows);
        (
            &lo[a * self.nrows..(a + 1) * self.nrows],
            &mut hi[..self.nrows],
        )
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// `self · x`.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![Complex64::new(0.0, 0.0); self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != Complex64::new(0.0, 0.0) {
                axpy(xj, self.col(j), &mut y);
            }
        }
        y
    }

    /// `selfᴴ · y`.
    pub fn adjoint_matvec(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.nrows);
        (0..self.ncols).map(|j| dotc(self.col(j), y)).collect()
    }

    /// Hermitian Gram matrix `selfᴴ · self` (both triangles filled).
    pub fn gram(&self) -> CMat {
        let n = self.ncols;
        let mut g = CMat::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let v = dotc(self.col(i), self.col(j));
                g.set(i, j, v);
                g.set(j, i, v.conj());
            }
        }
        g
    }

    /// Gathers the given columns into a fresh matrix.
    pub fn gather_columns(&self, cols: &[usize]) -> CMat {
        let mut m = CMat::zeros(self.nrows, cols.len());
        for (j, &c) in cols.iter().enumerate() {
            m.col_mut(j).copy_from_slice(self.col(c));
        }
        m
    }
}

/// `conj(v)·w` with split accumulators.
#[inline]
pub fn dotc(v: &[Complex64], w: &[Complex64]) -> Complex64 {
    debug_assert_eq!(v.len(), w.len());
    let mut re = 0.0f64;
    let mut im = 0.0f64;
    for (a, b) in v.iter().zip(w.iter()) {
        re += a.re * b.re + a.im * b.im;
        im += a.re * b.im - a.im * b.re;
    }
    Complex64::new(re, im)
}

/// `w += s·v`.
#[inline]
pub fn axpy(s: Complex64, v: &[Complex64], w: &mut [Complex64]) {
    debug_assert_eq!(v.len(), w.len());
    for (a, b) in v.iter().zip(w.iter_mut()) {
        let re = b.re + (s.re * a.re - s.im * a.im);
        let im = b.im + (s.re * a.im + s.im * a.re);
        b.re = re;
        b.im = im;
    }
}

/// Squared Euclidean norm, summed in index order.
#[inline]
pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.re * z.re + z.im * z.im).sum()
}
