//! Monte Carlo harness: metrics, seeded trials, SNR sweeps, and
//! `(N_p, SNR)` heatmaps with deterministic, thread-count-independent output.

mod rng;
mod sweep;
mod trial;

pub use rng::{splitmix64, trial_rng, trial_seed};
pub use sweep::{
    run_heatmap, run_heatmap_with_progress, run_sweep, run_sweep_with_progress, run_trials,
    HeatmapRow, HeatmapTable, SweepRow, SweepTable,
};
pub use trial::{EstimatorMetrics, TrialMetrics, TrialRunner};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::SupportPattern;
use crate::error::{DdError, Result};
use crate::grid::GridConfig;

/// The estimators the harness can run on a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Proposed,
    SharedMean,
    SharedTolerant,
    Sbl,
    Oracle,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Proposed,
        EstimatorKind::SharedMean,
        EstimatorKind::SharedTolerant,
        EstimatorKind::Sbl,
        EstimatorKind::Oracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::Proposed => "proposed",
            EstimatorKind::SharedMean => "shared_mean",
            EstimatorKind::SharedTolerant => "shared_tolerant",
            EstimatorKind::Sbl => "sbl",
            EstimatorKind::Oracle => "oracle",
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = DdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(EstimatorKind::Proposed),
            "shared_mean" => Ok(EstimatorKind::SharedMean),
            "shared_tolerant" => Ok(EstimatorKind::SharedTolerant),
            "sbl" => Ok(EstimatorKind::Sbl),
            "oracle" => Ok(EstimatorKind::Oracle),
            other => Err(DdError::Config(format!(
                "unknown estimator '{other}' (expected proposed, shared_mean, \
                 shared_tolerant, sbl, or oracle)"
            ))),
        }
    }
}

/// Pilot counts to simulate: a single value for sweeps, a list for heatmaps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NpSpec {
    One(usize),
    Many(Vec<usize>),
}

impl NpSpec {
    pub fn as_list(&self) -> Vec<usize> {
        match self {
            NpSpec::One(n) => vec![*n],
            NpSpec::Many(v) => v.clone(),
        }
    }

    /// The single pilot count, or an error when a list was configured.
    pub fn single(&self) -> Result<usize> {
        let list = self.as_list();
        match list.as_slice() {
            [n] => Ok(*n),
            _ => Err(DdError::Config(
                "this run needs a single n_p, but the config holds a list".into(),
            )),
        }
    }
}

/// Full description of a Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub n_p: NpSpec,
    pub snr_db_list: Vec<f64>,
    pub n_trials: usize,
    pub master_seed: u64,
    pub estimators: Vec<EstimatorKind>,
    pub lambda_reg: f64,
    pub require_nonempty: bool,
}

impl Default for ExperimentConfig {
    /// Reference experiment: the default grid, 8 pilots, an SNR sweep from 0
    /// to 30 dB, 300 trials, all five estimators.
    fn default() -> Self {
        ExperimentConfig {
            grid: GridConfig::default(),
            n_p: NpSpec::One(8),
            snr_db_list: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            n_trials: 300,
            master_seed: 7,
            estimators: EstimatorKind::ALL.to_vec(),
            lambda_reg: 1e-10,
            require_nonempty: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.n_trials < 1 {
            return Err(DdError::Config("n_trials must be at least 1".into()));
        }
        if self.snr_db_list.is_empty() {
            return Err(DdError::Config("snr_db_list must not be empty".into()));
        }
        if self.estimators.is_empty() {
            return Err(DdError::Config("at least one estimator is required".into()));
        }
        if self.n_p.as_list().is_empty() {
            return Err(DdError::Config("n_p list must not be empty".into()));
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(json)
            .map_err(|e| DdError::Config(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            DdError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Normalized mean-square error `‖α̂ - α‖²/‖α‖²`.
///
/// Undefined for a zero true channel; the harness prevents that by sampling
/// with `require_nonempty`.
pub fn nmse(alpha_hat: &[Complex64], alpha: &[Complex64]) -> Result<f64> {
    if alpha_hat.len() != alpha.len() {
        return Err(DdError::Dimension(format!(
            "nmse length mismatch: {} vs {}",
            alpha_hat.len(),
            alpha.len()
        )));
    }
    let den: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    if den == 0.0 {
        return Err(DdError::UndefinedMetric(
            "NMSE undefined for a zero channel".into(),
        ));
    }
    let num: f64 = alpha_hat
        .iter()
        .zip(alpha)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(num / den)
}

/// Exact support recovery: both axis sets equal (hence equal products).
pub fn exact_support_match(est: &SupportPattern, truth: &SupportPattern) -> bool {
    est.delays() == truth.delays() && est.dopplers() == truth.dopplers()
}
