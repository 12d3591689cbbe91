//! Householder QR: a rank-revealing column-pivoted factorization for
//! support-restricted least squares, and an append-only variant that grows a
//! factorization column by column for the nested supports visited by the
//! grid search.

use num_complex::Complex64;

use super::chol::Cholesky;
use super::mat::{dotc, norm_sqr, CMat};

const EPS: f64 = f64::EPSILON;

/// Builds a Householder reflector for `x` in place.
///
/// On return `x[0] = 1` and `x[1..]` holds the normalized tail; the reflector
/// is `H = I - τ·v·vᴴ` and maps the original `x` to `r·e₁` with
/// `r = -phase(x₀)·‖x‖` (the phase choice avoids cancellation). `τ` is real.
#[inline]
fn make_reflector(x: &mut [Complex64]) -> (f64, Complex64) {
    let mu = norm_sqr(x).sqrt();
    if mu == 0.0 {
        return (0.0, Complex64::new(0.0, 0.0));
    }
    let alpha = x[0];
    let anorm = alpha.norm();
    let phase = if anorm == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        alpha / anorm
    };
    let v0 = phase * (anorm + mu);
    let r = -phase * mu;
    let tau = (anorm + mu) / mu;
    x[0] = Complex64::new(1.0, 0.0);
    for z in x[1..].iter_mut() {
        *z /= v0;
    }
    (tau, r)
}

/// Applies `H = I - τ·v·vᴴ` (`v[0] = 1` stored explicitly) to `w`.
#[inline]
fn apply_reflector(tau: f64, v: &[Complex64], w: &mut [Complex64]) {
    if tau == 0.0 {
        return;
    }
    let d = dotc(v, w);
    let s = Complex64::new(d.re * tau, d.im * tau);
    for (a, b) in v.iter().zip(w.iter_mut()) {
        let re = b.re - (s.re * a.re - s.im * a.im);
        let im = b.im - (s.re * a.im + s.im * a.re);
        b.re = re;
        b.im = im;
    }
}

/// Column-pivoted Householder QR with rank detection.
///
/// Pivoting maximizes the residual column norm at each step (ties broken by
/// the smaller column index); the numerical rank is the number of steps whose
/// pivot norm stays above `max(m, n)·ε·(largest column norm)`.
pub struct ColPivQr {
    factors: CMat,
    taus: Vec<f64>,
    rdiag: Vec<Complex64>,
    /// `perm[slot]` = original column index stored in `slot`.
    perm: Vec<usize>,
    rank: usize,
}

/// Least-squares solution produced by [`ColPivQr::solve`].
pub struct LsSolution {
    /// Coefficients in the original column order.
    pub coeffs: Vec<Complex64>,
    /// `‖y - A·coeffs‖²` as seen through the factorization.
    pub rss: f64,
    /// True when the numerical rank fell short of the column count and the
    /// minimum-norm solution was returned.
    pub rank_deficient: bool,
}

impl ColPivQr {
    pub fn factor(mut a: CMat) -> Self {
        let m = a.nrows();
        let n = a.ncols();
        let kmax = m.min(n);
        let mut taus = Vec::with_capacity(kmax);
        let mut rdiag = Vec::with_capacity(kmax);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut tol = 0.0;
        for j in 0..kmax {
            let mut best = j;
            let mut best_norm = -1.0;
            for c in j..n {
                let nrm = norm_sqr(&a.col(c)[j..]);
                if nrm > best_norm {
                    best_norm = nrm;
                    best = c;
                }
            }
            let best_norm = best_norm.max(0.0).sqrt();
            if j == 0 {
                tol = m.max(n) as f64 * EPS * best_norm;
            }
            if best_norm <= tol {
                break;
            }
            if best != j {
                for i in 0..m {
                    let t = a.get(i, j);
                    a.set(i, j, a.get(i, best));
                    a.set(i, best, t);
                }
                perm.swap(j, best);
            }
            let (tau, r) = make_reflector(&mut a.col_mut(j)[j..]);
            taus.push(tau);
            rdiag.push(r);
            for c in j + 1..n {
                let (vj, wc) = a.col_shared_mut(j, c);
                apply_reflector(tau, &vj[j..], &mut wc[j..]);
            }
        }
        let rank = taus.len();
        ColPivQr {
            factors: a,
            taus,
            rdiag,
            perm,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Entry `R[i, slot]` of the triangular factor (`i ≤ min(slot, rank-1)`).
    #[inline]
    fn r_entry(&self, i: usize, slot: usize) -> Complex64 {
        if i == slot && slot < self.rank {
            self.rdiag[slot]
        } else {
            self.factors.get(i, slot)
        }
    }

    /// Solves `min ‖y - A·x‖²`; returns the minimum-norm solution when the
    /// factorization revealed rank deficiency.
    pub fn solve(&self, y: &[Complex64]) -> LsSolution {
        let m = self.factors.nrows();
        let n = self.factors.ncols();
        assert_eq!(y.len(), m);
        let k = self.rank;
        let mut qty = y.to_vec();
        for j in 0..k {
            apply_reflector(self.taus[j], &self.factors.col(j)[j..], &mut qty[j..]);
        }
        let rss = norm_sqr(&qty[k..]);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        if k == 0 {
            return LsSolution {
                coeffs,
                rss,
                rank_deficient: n > 0,
            };
        }
        if k == n {
            // back-substitution on the full triangle
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            for j in (0..n).rev() {
                let mut acc = qty[j];
                for (c, vc) in v.iter().enumerate().skip(j + 1) {
                    acc -= self.r_entry(j, c) * vc;
                }
                v[j] = acc / self.rdiag[j];
            }
            for (slot, &orig) in self.perm.iter().enumerate() {
                coeffs[orig] = v[slot];
            }
            LsSolution {
                coeffs,
                rss,
                rank_deficient: false,
            }
        } else {
            // minimum-norm solution through the rank-k leading rows:
            // w = Rₖᴴ·(Rₖ·Rₖᴴ)⁻¹·(Qᴴy)₁..ₖ
            let mut rk = CMat::zeros(k, n);
            for slot in 0..n {
                for i in 0..=(slot.min(k.saturating_sub(1))) {
                    rk.set(i, slot, self.r_entry(i, slot));
                }
            }
            let s = rk_gram_rows(&rk);
            let chol = Cholesky::factor(&s).expect("Rₖ·Rₖᴴ is positive definite at rank k");
            let u = chol.solve(&qty[..k]);
            // w = Rₖᴴ·u
            for slot in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                let top = slot.min(k - 1);
                for (i, ui) in u.iter().enumerate().take(top + 1) {
                    acc += rk.get(i, slot).conj() * ui;
                }
                coeffs[self.perm[slot]] = acc;
            }
            LsSolution {
                coeffs,
                rss,
                rank_deficient: true,
            }
        }
    }
}

/// `Rₖ·Rₖᴴ` for a `k×n` matrix with `k ≤ n`.
fn rk_gram_rows(rk: &CMat) -> CMat {
    let k = rk.nrows();
    let n = rk.ncols();
    let mut s = CMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..n {
                // Σ R[i,c]·conj(R[j,c])
                acc += rk.get(i, c) * rk.get(j, c).conj();
            }
            s.set(i, j, acc);
        }
    }
    s
}

/// Append-only QR over a growing column set.
///
/// Tracks only the Householder reflectors and the rotated right-hand side, so
/// after every appended column the residual sum of squares of the
/// least-squares fit on all columns pushed so far is available in O(m).
/// Columns that are numerically dependent on the previous ones are accepted
/// but contribute no reflector (the RSS equals the minimum-norm fit).
pub struct GrowingQr {
    factors: CMat,
    taus: Vec<f64>,
    qty: Vec<Complex64>,
    scratch: Vec<Complex64>,
    rank: usize,
    pushed: usize,
    max_col_norm: f64,
}

impl GrowingQr {
    pub fn new(y: &[Complex64], capacity: usize) -> Self {
        let m = y.len();
        let cap = capacity.min(m);
        GrowingQr {
            factors: CMat::zeros(m, cap),
            taus: Vec::with_capacity(cap),
            qty: y.to_vec(),
            scratch: vec![Complex64::new(0.0, 0.0); m],
            rank: 0,
            pushed: 0,
            max_col_norm: 0.0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn pushed(&self) -> usize {
        self.pushed
    }

    /// Appends one column to the factorization.
    pub fn push_column(&mut self, col: &[Complex64]) {
        let m = self.qty.len();
        assert_eq!(col.len(), m);
        assert!(self.rank < self.factors.ncols(), "GrowingQr capacity exceeded");
        self.pushed += 1;
        self.max_col_norm = self.max_col_norm.max(norm_sqr(col).sqrt());
        self.scratch.copy_from_slice(col);
        for j in 0..self.rank {
            apply_reflector(
                self.taus[j],
                &self.factors.col(j)[j..],
                &mut self.scratch[j..],
            );
        }
        let j = self.rank;
        let tol = m.max(self.pushed) as f64 * EPS * self.max_col_norm;
        let sub_norm = norm_sqr(&self.scratch[j..]).sqrt();
        if sub_norm <= tol {
            // dependent column: no new reflector, fit unchanged
            return;
        }
        let (tau, _r) = make_reflector(&mut self.scratch[j..]);
        self.factors.col_mut(j)[j..].copy_from_slice(&self.scratch[j..]);
        self.taus.push(tau);
        apply_reflector(tau, &self.factors.col(j)[j..], &mut self.qty[j..]);
        self.rank += 1;
    }

    /// `‖y - A·x̂‖²` for the least-squares fit on all pushed columns.
    pub fn rss(&self) -> f64 {
        norm_sqr(&self.qty[self.rank..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeded_mat(m: usize, n: usize, seed: u64) -> CMat {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = CMat::zeros(m, n);
        for j in 0..n {
            for i in 0..m {
                a.set(i, j, Complex64::new(next(), next()));
            }
        }
        a
    }

    fn seeded_vec(m: usize, seed: u64) -> Vec<Complex64> {
        seeded_mat(m, 1, seed).col(0).to_vec()
    }

    /// Brute-force normal-equation solve by Gaussian elimination with
    /// partial pivoting; deliberately shares no code with the QR path.
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn normal_equation_ls(a: &CMat, y: &[Complex64]) -> (Vec<Complex64>, f64) {
        let n = a.ncols();
        let mut g = vec![vec![Complex64::new(0.0, 0.0); n + 1]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..a.nrows() {
                    acc += a.get(k, i).conj() * a.get(k, j);
                }
                g[i][j] = acc;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..a.nrows() {
                acc += a.get(k, i).conj() * y[k];
            }
            g[i][n] = acc;
        }
        for p in 0..n {
            let pivot = (p..n)
                .max_by(|&r, &s| g[r][p].norm().partial_cmp(&g[s][p].norm()).unwrap())
                .unwrap();
            g.swap(p, pivot);
            let d = g[p][p];
            for c in p..=n {
                g[p][c] /= d;
            }
            for r in 0..n {
                if r != p {
                    let f = g[r][p];
                    for c in p..=n {
                        let sub = f * g[p][c];
                        g[r][c] -= sub;
                    }
                }
            }
        }
        let x: Vec<Complex64> = (0..n).map(|i| g[i][n]).collect();
        let fit = a.matvec(&x);
        let rss = y
            .iter()
            .zip(&fit)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>();
        (x, rss)
    }

    #[test]
    fn full_rank_solve_matches_normal_equations() {
        for seed in 0..10u64 {
            let a = seeded_mat(20, 12, seed + 1);
            let y = seeded_vec(20, seed + 100);
            let sol = ColPivQr::factor(a.clone()).solve(&y);
            assert!(!sol.rank_deficient);
            let (x_ref, rss_ref) = normal_equation_ls(&a, &y);
            let num: f64 = sol
                .coeffs
                .iter()
                .zip(&x_ref)
                .map(|(u, v)| (u - v).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let den: f64 = x_ref.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!(num / den < 1e-10, "coeff mismatch {}", num / den);
            assert!((sol.rss - rss_ref).abs() / rss_ref.max(1e-300) < 1e-8);
        }
    }

    #[test]
    fn duplicated_column_gets_min_norm_split() {
        // two identical physical columns: minimum-norm splits the coefficient
        let base = seeded_mat(16, 1, 3);
        let a = CMat::from_columns(16, &[base.col(0), base.col(0)]);
        let y = seeded_vec(16, 9);
        let sol = ColPivQr::factor(a.clone()).solve(&y);
        assert!(sol.rank_deficient);
        let single = ColPivQr::factor(base.clone()).solve(&y);
        assert!((sol.coeffs[0] - sol.coeffs[1]).norm() < 1e-12);
        assert!((sol.coeffs[0] - single.coeffs[0] / 2.0).norm() < 1e-12);
        // same fit as the single-column model
        let fit = a.matvec(&sol.coeffs);
        let rss: f64 = y
            .iter()
            .zip(&fit)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum();
        assert!((rss - single.rss).abs() < 1e-10 * norm_sqr(&y));
    }

    #[test]
    fn growing_qr_tracks_batch_rss() {
        let a = seeded_mat(30, 8, 17);
        let y = seeded_vec(30, 23);
        let mut qr = GrowingQr::new(&y, 8);
        for j in 0..8 {
            qr.push_column(a.col(j));
            let sub = a.gather_columns(&(0..=j).collect::<Vec<_>>());
            let direct = ColPivQr::factor(sub).solve(&y);
            let rel = (qr.rss() - direct.rss).abs() / norm_sqr(&y);
            assert!(rel < 1e-12, "rss mismatch at column {j}: {rel}");
        }
    }

    #[test]
    fn growing_qr_skips_dependent_columns() {
        let a = seeded_mat(10, 2, 5);
        let y = seeded_vec(10, 6);
        let mut qr = GrowingQr::new(&y, 4);
        qr.push_column(a.col(0));
        let rss1 = qr.rss();
        qr.push_column(a.col(0)); // exact repeat
        assert_eq!(qr.rank(), 1);
        assert_eq!(qr.pushed(), 2);
        assert!((qr.rss() - rss1).abs() < 1e-14);
        qr.push_column(a.col(1));
        assert_eq!(qr.rank(), 2);
        assert!(qr.rss() <= rss1);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let a = CMat::zeros(6, 3);
        let y = seeded_vec(6, 2);
        let qr = ColPivQr::factor(a);
        assert_eq!(qr.rank(), 0);
        let sol = qr.solve(&y);
        // the min-norm path is skipped (k = 0) and all coefficients stay 0
        assert!(sol.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0)));
        assert!((sol.rss - norm_sqr(&y)).abs() < 1e-15);
    }
}
