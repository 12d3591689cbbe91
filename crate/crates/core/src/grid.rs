//! Static delay-Doppler grid and AFDM chirp parameters.
//!
//! The grid has `L` delay taps and `B = 2Q+1` Doppler bins per tap. A grid
//! point `(l, q)` with `l ∈ [0, L)` and `q ∈ [-Q, Q]` maps to a flat column
//! index through [`dd_index`]; every piece of vector or matrix addressing in
//! the crate goes through that one map so the sign convention for Doppler
//! lives in a single place.

use serde::{Deserialize, Serialize};

use crate::error::{DdError, Result};

/// Static grid geometry, AFDM chirp parameters, and channel activity
/// probabilities.
///
/// `c1` must satisfy `2·N·c1 == -p_afdm` exactly (an integer), otherwise the
/// modular index arithmetic of the sensing atoms would leave the grid. `c2`
/// is a free chirp parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Frame length `N` in samples.
    pub frame_len: usize,
    /// Number of delay taps `L`.
    pub delay_taps: usize,
    /// Maximum normalized Doppler index `Q`.
    pub max_doppler: usize,
    /// First AFDM chirp parameter; `-p_afdm / (2N)` in the reference setup.
    pub c1: f64,
    /// Second AFDM chirp parameter.
    pub c2: f64,
    /// Integer pilot parameter; equals `-2·N·c1`.
    pub p_afdm: i64,
    /// Delay activity probability `p_d ∈ [0, 1]`.
    pub delay_activity: f64,
    /// Doppler activity probability `p_D ∈ [0, 1]`.
    pub doppler_activity: f64,
}

impl GridConfig {
    /// Builds a config with `c1 = -p_afdm/(2N)` and the given `c2`.
    pub fn afdm(
        frame_len: usize,
        delay_taps: usize,
        max_doppler: usize,
        p_afdm: i64,
        c2: f64,
        delay_activity: f64,
        doppler_activity: f64,
    ) -> Result<Self> {
        let cfg = GridConfig {
            frame_len,
            delay_taps,
            max_doppler,
            c1: -(p_afdm as f64) / (2.0 * frame_len as f64),
            c2,
            p_afdm,
            delay_activity,
            doppler_activity,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Doppler block size `B = 2Q + 1`.
    pub fn doppler_bins(&self) -> usize {
        2 * self.max_doppler + 1
    }

    /// Total number of grid points `L·B` (columns of the sensing matrix).
    pub fn grid_cols(&self) -> usize {
        self.delay_taps * self.doppler_bins()
    }

    /// Exact integer value of `2·N·c1` (validated to be `-p_afdm`).
    pub fn two_n_c1(&self) -> i64 {
        -self.p_afdm
    }

    /// Per-coefficient gain variance `1/(p_d·p_D·L·B)` that normalizes the
    /// expected total channel power to one.
    pub fn gain_variance(&self) -> f64 {
        1.0 / (self.delay_activity * self.doppler_activity * self.grid_cols() as f64)
    }

    /// Column index of grid point `(l, q)`; see [`dd_index`].
    pub fn column_of(&self, l: usize, q: i64) -> Result<usize> {
        if l >= self.delay_taps {
            return Err(DdError::Range(format!(
                "delay {l} outside [0, {})",
                self.delay_taps
            )));
        }
        dd_index(l, q, self.max_doppler, self.doppler_bins())
    }

    pub fn validate(&self) -> Result<()> {
        if self.delay_taps < 1 {
            return Err(DdError::Config("need at least one delay tap".into()));
        }
        if self.frame_len <= self.grid_cols() {
            return Err(DdError::Config(format!(
                "frame length {} must exceed grid size L·B = {}",
                self.frame_len,
                self.grid_cols()
            )));
        }
        let two_n_c1 = 2.0 * self.frame_len as f64 * self.c1;
        if (two_n_c1 - two_n_c1.round()).abs() > 1e-9 {
            return Err(DdError::Config(format!(
                "2·N·c1 = {two_n_c1} is not an integer"
            )));
        }
        if (two_n_c1.round() as i64) != -self.p_afdm {
            return Err(DdError::Config(format!(
                "2·N·c1 = {} does not match -p_afdm = {}",
                two_n_c1.round(),
                -self.p_afdm
            )));
        }
        for (name, p) in [
            ("delay_activity", self.delay_activity),
            ("doppler_activity", self.doppler_activity),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(DdError::Config(format!("{name} = {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

impl Default for GridConfig {
    /// Reference AFDM setup: `N = 4096`, `L = 30`, `Q = 7`, `P_afdm = 2`,
    /// `c1 = -1/4096`, `c2 = 1/(20N)`, activity probabilities 0.2.
    fn default() -> Self {
        GridConfig::afdm(4096, 30, 7, 2, 1.0 / (20.0 * 4096.0), 0.2, 0.2)
            .expect("reference config is valid")
    }
}

/// Flat 0-based column index of the delay-Doppler grid point `(l, q)`:
/// `l·B + (q + Q)`.
///
/// Note this is the 0-based counterpart of the 1-based convention
/// `ι(l,q) = l·B + (q + Q + 1)` sometimes used for the same layout; callers
/// indexing into matrices and vectors in this crate always use the 0-based
/// form.
pub fn dd_index(l: usize, q: i64, max_doppler: usize, doppler_bins: usize) -> Result<usize> {
    let q_max = max_doppler as i64;
    if q < -q_max || q > q_max {
        return Err(DdError::Range(format!("doppler {q} outside [-{q_max}, {q_max}]")));
    }
    Ok(l * doppler_bins + (q + q_max) as usize)
}

/// Inverse of [`dd_index`]: the `(l, q)` pair stored at a flat column index.
pub fn dd_pair(col: usize, max_doppler: usize, doppler_bins: usize) -> (usize, i64) {
    let l = col / doppler_bins;
    let q = (col % doppler_bins) as i64 - max_doppler as i64;
    (l, q)
}
