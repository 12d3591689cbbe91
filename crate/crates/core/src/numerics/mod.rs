//! Complex linear-algebra kernels: the ridge proxy, support-restricted least
//! squares with a rank-revealing factorization, and top-k selection.

mod chol;
mod mat;
mod qr;
mod topk;

pub use chol::Cholesky;
pub use mat::{axpy, dotc, norm_sqr, CMat};
pub use qr::{ColPivQr, GrowingQr, LsSolution};
pub use topk::{rank_desc, top_k};

use num_complex::Complex64;

use crate::error::{DdError, Result};

/// RSS floor factor: the BIC likelihood term floors the residual at
/// `1e-12·‖y‖²` so near-interpolating fits keep a finite score.
pub const RSS_FLOOR_FACTOR: f64 = 1e-12;

/// Result of a support-restricted least-squares fit.
#[derive(Debug, Clone)]
pub struct RestrictedLsResult {
    /// One coefficient per selected column, in the order given.
    pub coeffs: Vec<Complex64>,
    /// Residual sum of squares `‖y - M_S·coeffs‖²`.
    pub rss: f64,
    /// Set when the selected columns were numerically rank deficient and the
    /// minimum-norm solution was returned.
    pub rank_deficient: bool,
}

/// Least squares restricted to the given columns of `a`.
///
/// An empty selection yields the empty model with `rss = ‖y‖²`. Rank-deficient
/// selections fall back to the minimum-norm solution rather than failing, so
/// every candidate produces a finite, comparable RSS. Selections larger than
/// the observation count are refused.
pub fn restricted_ls(a: &CMat, y: &[Complex64], cols: &[usize]) -> Result<RestrictedLsResult> {
    assert_eq!(y.len(), a.nrows());
    if cols.len() > a.nrows() {
        return Err(DdError::Dimension(format!(
            "{} columns selected but only {} observations",
            cols.len(),
            a.nrows()
        )));
    }
    for w in cols.windows(2) {
        if w[0] >= w[1] {
            return Err(DdError::Range(
                "column selection must be strictly ascending".into(),
            ));
        }
    }
    if let Some(&last) = cols.last() {
        if last >= a.ncols() {
            return Err(DdError::Range(format!(
                "column {last} outside [0, {})",
                a.ncols()
            )));
        }
    }
    if cols.is_empty() {
        return Ok(RestrictedLsResult {
            coeffs: Vec::new(),
            rss: norm_sqr(y),
            rank_deficient: false,
        });
    }
    let sub = a.gather_columns(cols);
    let sol = ColPivQr::factor(sub.clone()).solve(y);
    let rss = if sol.rank_deficient {
        // recompute directly: the truncated triangle is only approximate here
        let fit = sub.matvec(&sol.coeffs);
        y.iter()
            .zip(&fit)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum()
    } else {
        sol.rss
    };
    Ok(RestrictedLsResult {
        coeffs: sol.coeffs,
        rss,
        rank_deficient: sol.rank_deficient,
    })
}

/// Reusable factorization of the ridge Gram system
/// `(MᴴM + λ·I)·z = Mᴴ·y`; build once per sensing matrix and regularization,
/// then solve per observation.
pub struct RidgeSolver {
    chol: Cholesky,
    lambda: f64,
}

impl RidgeSolver {
    /// Factors `gram + λ·I`. `gram` must be `MᴴM` for the matrix whose
    /// correlations will be passed to [`RidgeSolver::solve_correlation`].
    pub fn from_gram(gram: &CMat, lambda: f64) -> Result<Self> {
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(DdError::Config(format!(
                "ridge regularization must be positive, got {lambda}"
            )));
        }
        let n = gram.nrows();
        let mut shifted = gram.clone();
        for i in 0..n {
            let d = shifted.get(i, i);
            shifted.set(i, i, d + Complex64::new(lambda, 0.0));
        }
        let chol = Cholesky::factor(&shifted).map_err(|e| {
            DdError::Numeric(format!("ridge Gram factorization failed: {e}"))
        })?;
        Ok(RidgeSolver { chol, lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Solves for `z` given the correlation vector `b = Mᴴ·y`.
    pub fn solve_correlation(&self, b: &[Complex64]) -> Vec<Complex64> {
        self.chol.solve(b)
    }
}

/// Tikhonov-regularized least squares
/// `z = argmin ‖y - A·u‖² + λ‖u‖²`, solved through the Gram system.
pub fn ridge_solve(a: &CMat, y: &[Complex64], lambda: f64) -> Result<Vec<Complex64>> {
    let solver = RidgeSolver::from_gram(&a.gram(), lambda)?;
    Ok(solver.solve_correlation(&a.adjoint_matvec(y)))
}

/// Exact binomial coefficient; `None` when the value overflows u128.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul((n - k + i) as u128)?;
        acc /= i as u128; // C(n, i) is integral, so this division is exact
    }
    Some(acc)
}
