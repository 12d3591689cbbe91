//! The structured support search shared by the sparsity-agnostic estimator
//! and the fixed-budget baselines, plus oracle least squares.
//!
//! The search follows one loop order everywhere: Doppler count `r` outer
//! ascending, delay count `d` inner ascending, keeping the first strict BIC
//! minimum. For a fixed `r` the candidate delay sets are nested, so the
//! grid row is evaluated with an append-only QR instead of refactoring each
//! cell from scratch; the winning support is always refit through
//! [`restricted_ls`], which is also exactly what the oracle runs.

use num_complex::Complex64;

use super::{
    bic_score, build_pattern, candidate_doppler, delay_ranking, product_columns, reshape_proxy,
    EstimationResult, ScoreTable,
};
use crate::channel::SupportPattern;
use crate::error::{DdError, Result};
use crate::numerics::{norm_sqr, restricted_ls, GrowingQr, RidgeSolver, RSS_FLOOR_FACTOR};
use crate::sensing::SensingMatrix;

/// Structured-search front end with the ridge system factored once; reuse a
/// single instance across the trials that share a sensing matrix.
pub struct StructuredEstimator {
    ridge: RidgeSolver,
    grid_cols: usize,
}

impl StructuredEstimator {
    pub fn new(mp: &SensingMatrix, lambda_reg: f64) -> Result<Self> {
        let ridge = RidgeSolver::from_gram(mp.gram(), lambda_reg)?;
        Ok(StructuredEstimator {
            ridge,
            grid_cols: mp.ncols(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.ridge.lambda()
    }

    /// Ridge proxy `z = (MᴴM + λI)⁻¹Mᴴy`.
    pub fn proxy(&self, mp: &SensingMatrix, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(mp.ncols(), self.grid_cols, "estimator built for another grid");
        self.ridge.solve_correlation(&mp.correlate(y))
    }

    /// Sparsity-agnostic estimate: grid search over `(d, r)` with BIC
    /// selection, then least squares on the winning support.
    pub fn proposed(&self, mp: &SensingMatrix, y: &[Complex64]) -> Result<EstimationResult> {
        self.search(mp, y, false)
    }

    /// Same search evaluated cell-by-cell with an independent factorization
    /// per candidate. Slow; kept as the reference semantics for tests.
    pub fn proposed_reference(&self, mp: &SensingMatrix, y: &[Complex64]) -> Result<EstimationResult> {
        self.search(mp, y, true)
    }

    fn search(&self, mp: &SensingMatrix, y: &[Complex64], reference: bool) -> Result<EstimationResult> {
        let cfg = mp.cfg();
        let l_taps = cfg.delay_taps;
        let b = cfg.doppler_bins();
        let m = mp.nrows();
        let y_energy = norm_sqr(y);
        let floor = RSS_FLOOR_FACTOR * y_energy;
        let zmat = reshape_proxy(&self.proxy(mp, y), cfg);

        let mut table = ScoreTable::new(l_taps, b);
        let empty_score = bic_score(y_energy, floor, m, 0, 0);
        for d in 0..=l_taps {
            table.set(d, 0, empty_score);
        }
        // the first visited cell is (d=0, r=0); later empty-model cells tie
        // and are skipped by the strict inequality
        let mut best_score = empty_score;
        let mut best: Option<(Vec<usize>, Vec<i64>)> = None;

        for r in 1..=b {
            table.set(0, r, empty_score);
            let dopplers = candidate_doppler(&zmat, cfg.max_doppler, r)?;
            let ranking = delay_ranking(&zmat, cfg.max_doppler, &dopplers);
            let mut qr = if reference {
                None
            } else {
                let capacity = l_taps.min((m - 1) / r) * r;
                Some(GrowingQr::new(y, capacity))
            };
            for d in 1..=l_taps {
                if d * r >= m {
                    // non-identifiable cells stay +∞ in the table
                    break;
                }
                let rss = match qr.as_mut() {
                    Some(qr) => {
                        let new_delay = ranking[d - 1];
                        for &q in &dopplers {
                            let col = cfg.column_of(new_delay, q)?;
                            qr.push_column(mp.matrix().col(col));
                        }
                        qr.rss()
                    }
                    None => {
                        let mut delays = ranking[..d].to_vec();
                        delays.sort_unstable();
                        let cols = product_columns(&delays, &dopplers, cfg);
                        restricted_ls(mp.matrix(), y, &cols)?.rss
                    }
                };
                let score = bic_score(rss, floor, m, d, r);
                table.set(d, r, score);
                if score < best_score {
                    best_score = score;
                    let mut delays = ranking[..d].to_vec();
                    delays.sort_unstable();
                    best = Some((delays, dopplers.clone()));
                }
            }
        }

        let (delays, dopplers) = best.unwrap_or((Vec::new(), Vec::new()));
        let support = build_pattern(delays, dopplers, cfg)?;
        finish_fit(mp, y, support, Some(table), floor)
    }

    /// Fixed-budget baseline: same proxy and candidate rule, dimensions
    /// frozen at `(d, r)`, no model-order search.
    pub fn fixed(
        &self,
        mp: &SensingMatrix,
        y: &[Complex64],
        d: usize,
        r: usize,
    ) -> Result<EstimationResult> {
        let cfg = mp.cfg();
        if d > cfg.delay_taps || r > cfg.doppler_bins() {
            return Err(DdError::Range(format!(
                "fixed budget ({d}, {r}) outside grid ({}, {})",
                cfg.delay_taps,
                cfg.doppler_bins()
            )));
        }
        if d * r >= mp.nrows() {
            return Err(DdError::Dimension(format!(
                "fixed budget {d}·{r} is not identifiable from {} observations",
                mp.nrows()
            )));
        }
        let y_energy = norm_sqr(y);
        let floor = RSS_FLOOR_FACTOR * y_energy;
        let zmat = reshape_proxy(&self.proxy(mp, y), cfg);
        let dopplers = candidate_doppler(&zmat, cfg.max_doppler, r)?;
        let delays = super::candidate_delay(&zmat, cfg.max_doppler, &dopplers, d)?;
        let support = build_pattern(delays, dopplers, cfg)?;
        finish_fit(mp, y, support, None, floor)
    }
}

/// Least squares on a product support, scattered back to the full grid.
fn finish_fit(
    mp: &SensingMatrix,
    y: &[Complex64],
    support: SupportPattern,
    score_table: Option<ScoreTable>,
    floor: f64,
) -> Result<EstimationResult> {
    let cfg = mp.cfg();
    let cols = support.product_columns(cfg);
    let fit = restricted_ls(mp.matrix(), y, &cols)?;
    let mut alpha_hat = vec![Complex64::new(0.0, 0.0); mp.ncols()];
    for (i, &c) in cols.iter().enumerate() {
        alpha_hat[c] = fit.coeffs[i];
    }
    let d_hat = support.delay_count();
    let r_hat = support.doppler_count();
    let bic = bic_score(fit.rss, floor, mp.nrows(), d_hat, r_hat);
    Ok(EstimationResult {
        support,
        support_is_product: true,
        active_cols: cols,
        d_hat,
        r_hat,
        alpha_hat,
        rss: fit.rss,
        bic,
        score_table,
        converged: true,
    })
}

/// One-shot sparsity-agnostic estimate; see [`StructuredEstimator::proposed`].
pub fn estimate_proposed(
    mp: &SensingMatrix,
    y: &[Complex64],
    lambda_reg: f64,
) -> Result<EstimationResult> {
    StructuredEstimator::new(mp, lambda_reg)?.proposed(mp, y)
}

/// One-shot fixed-budget estimate; see [`StructuredEstimator::fixed`].
pub fn estimate_fixed(
    mp: &SensingMatrix,
    y: &[Complex64],
    lambda_reg: f64,
    d: usize,
    r: usize,
) -> Result<EstimationResult> {
    StructuredEstimator::new(mp, lambda_reg)?.fixed(mp, y, d, r)
}

/// Least squares on the true support: the performance lower bound.
pub fn estimate_oracle(
    mp: &SensingMatrix,
    y: &[Complex64],
    true_support: &SupportPattern,
) -> Result<EstimationResult> {
    let floor = RSS_FLOOR_FACTOR * norm_sqr(y);
    finish_fit(mp, y, true_support.clone(), None, floor)
}
