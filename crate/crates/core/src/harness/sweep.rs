//! SNR sweeps and `(N_p, SNR)` heatmaps over seeded parallel trials.
//!
//! Trials are embarrassingly parallel; results are collected in trial-index
//! order and reduced sequentially, so a sweep's output is byte-identical
//! across runs and across thread counts.

use rayon::prelude::*;

use super::trial::{TrialMetrics, TrialRunner};
use super::{EstimatorKind, ExperimentConfig};
use crate::error::{DdError, Result};

/// One aggregated sweep point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub snr_db: f64,
    pub estimator: EstimatorKind,
    pub mean_nmse: f64,
    /// 95% normal-approximation half width of the NMSE mean.
    pub nmse_ci: f64,
    pub support_rate: f64,
    /// 95% normal-approximation half width of the recovery rate.
    pub rate_ci: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("snr_db,estimator,mean_nmse,nmse_ci,support_rate,rate_ci,n_trials\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.snr_db, r.estimator, r.mean_nmse, r.nmse_ci, r.support_rate, r.rate_ci, r.n_trials
            ));
        }
        out
    }

    pub fn row(&self, snr_db: f64, estimator: EstimatorKind) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.snr_db == snr_db && r.estimator == estimator)
    }
}

/// One aggregated heatmap cell.
#[derive(Debug, Clone)]
pub struct HeatmapRow {
    pub n_p: usize,
    pub snr_db: f64,
    pub estimator: EstimatorKind,
    pub support_rate: f64,
    pub rate_ci: f64,
}

#[derive(Debug, Clone)]
pub struct HeatmapTable {
    pub rows: Vec<HeatmapRow>,
}

impl HeatmapTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n_p,snr_db,estimator,support_rate,rate_ci\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n_p, r.snr_db, r.estimator, r.support_rate, r.rate_ci
            ));
        }
        out
    }

    pub fn row(&self, n_p: usize, snr_db: f64, estimator: EstimatorKind) -> Option<&HeatmapRow> {
        self.rows
            .iter()
            .find(|r| r.n_p == n_p && r.snr_db == snr_db && r.estimator == estimator)
    }
}

/// Runs `n_trials` seeded trials at one SNR point, in parallel when a pool
/// is given, returning metrics in trial order.
pub fn run_trials(
    runner: &TrialRunner,
    snr_db: f64,
    n_trials: usize,
    master_seed: u64,
    estimators: &[EstimatorKind],
    pool: Option<&rayon::ThreadPool>,
) -> Result<Vec<TrialMetrics>> {
    let job = || -> Result<Vec<TrialMetrics>> {
        (0..n_trials as u64)
            .into_par_iter()
            .map(|t| runner.run_trial(snr_db, t, master_seed, estimators))
            .collect()
    };
    match pool {
        Some(p) => p.install(job),
        None => job(),
    }
}

/// Sequential mean and 95% CI half-width over trial-ordered values.
fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, 1.96 * (var / n as f64).sqrt())
}

fn rate_ci(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, 1.96 * (p * (1.0 - p) / n as f64).sqrt())
}

pub(crate) fn aggregate_point(
    snr_db: f64,
    metrics: &[TrialMetrics],
    estimators: &[EstimatorKind],
) -> Vec<SweepRow> {
    estimators
        .iter()
        .map(|&kind| {
            let nmses: Vec<f64> = metrics
                .iter()
                .map(|m| m.metric(kind).expect("estimator ran").nmse)
                .collect();
            let hits = metrics
                .iter()
                .filter(|m| m.metric(kind).expect("estimator ran").exact_support)
                .count();
            let (mean_nmse, nmse_ci) = mean_ci(&nmses);
            let (support_rate, rate_ci) = rate_ci(hits, metrics.len());
            SweepRow {
                snr_db,
                estimator: kind,
                mean_nmse,
                nmse_ci,
                support_rate,
                rate_ci,
                n_trials: metrics.len(),
            }
        })
        .collect()
}

fn build_pool(threads: Option<usize>) -> Result<Option<rayon::ThreadPool>> {
    match threads {
        None => Ok(None),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map(Some)
            .map_err(|e| DdError::Numeric(format!("thread pool: {e}"))),
    }
}

/// Average-NMSE and support-recovery sweep over the configured SNR list at a
/// single pilot count.
pub fn run_sweep(config: &ExperimentConfig, threads: Option<usize>) -> Result<SweepTable> {
    run_sweep_with_progress(config, threads, |_, _| {})
}

/// [`run_sweep`] with a callback after each completed SNR point
/// (`done`, `total`).
pub fn run_sweep_with_progress(
    config: &ExperimentConfig,
    threads: Option<usize>,
    mut progress: impl FnMut(usize, usize),
) -> Result<SweepTable> {
    config.validate()?;
    let n_p = config.n_p.single()?;
    let pool = build_pool(threads)?;
    let runner = TrialRunner::new(&config.grid, n_p, config.lambda_reg, config.require_nonempty)?;
    let mut rows = Vec::new();
    let total = config.snr_db_list.len();
    for (i, &snr_db) in config.snr_db_list.iter().enumerate() {
        let metrics = run_trials(
            &runner,
            snr_db,
            config.n_trials,
            config.master_seed,
            &config.estimators,
            pool.as_ref(),
        )?;
        rows.extend(aggregate_point(snr_db, &metrics, &config.estimators));
        progress(i + 1, total);
    }
    Ok(SweepTable { rows })
}

/// Support-recovery rates over the `(N_p, SNR)` plane; the pilot layout and
/// sensing matrix are rebuilt for every pilot count.
pub fn run_heatmap(config: &ExperimentConfig, threads: Option<usize>) -> Result<HeatmapTable> {
    run_heatmap_with_progress(config, threads, |_, _| {})
}

pub fn run_heatmap_with_progress(
    config: &ExperimentConfig,
    threads: Option<usize>,
    mut progress: impl FnMut(usize, usize),
) -> Result<HeatmapTable> {
    config.validate()?;
    let pool = build_pool(threads)?;
    let np_list = config.n_p.as_list();
    let total = np_list.len() * config.snr_db_list.len();
    let mut done = 0;
    let mut rows = Vec::new();
    for &n_p in &np_list {
        let runner =
            TrialRunner::new(&config.grid, n_p, config.lambda_reg, config.require_nonempty)?;
        for &snr_db in &config.snr_db_list {
            let metrics = run_trials(
                &runner,
                snr_db,
                config.n_trials,
                config.master_seed,
                &config.estimators,
                pool.as_ref(),
            )?;
            for row in aggregate_point(snr_db, &metrics, &config.estimators) {
                rows.push(HeatmapRow {
                    n_p,
                    snr_db: row.snr_db,
                    estimator: row.estimator,
                    support_rate: row.support_rate,
                    rate_ci: row.rate_ci,
                });
            }
            done += 1;
            progress(done, total);
        }
    }
    Ok(HeatmapTable { rows })
}
