//! AFDM pilot layout, sensing matrix construction, and noisy observation
//! synthesis.
//!
//! Pilots live in the DAFT domain. Each pilot at position `m_i` influences
//! the receive indices `k = m_i + q + P_afdm·l (mod N)` over the whole grid,
//! a window of `W = B + P_afdm·(L-1)` consecutive samples. The layout here
//! places `N_p` unit pilots so their windows tile `[0, N_p·W)` disjointly,
//! which keeps every grid atom fully observed.

pub mod io;

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{DdError, Result};
use crate::grid::{dd_pair, GridConfig};
use crate::numerics::CMat;

/// Pilot placement and the induced observation index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotConfig {
    /// Number of pilot symbols `N_p`.
    pub n_pilots: usize,
    /// DAFT-domain pilot positions, ascending.
    pub pilot_positions: Vec<usize>,
    /// Unit-modulus pilot values, one per position.
    pub pilot_values: Vec<Complex64>,
    /// Observed receive indices `P`, ascending and duplicate-free.
    pub obs_indices: Vec<usize>,
    /// Per-pilot observation window width `W = B + P_afdm·(L-1)`.
    pub window_size: usize,
    /// Transmit indices reserved for pilots plus zero guards so no data
    /// symbol leaks into any observation window.
    pub guard_overhead: usize,
}

impl PilotConfig {
    /// Number of observations `M = |P|`.
    pub fn observation_count(&self) -> usize {
        self.obs_indices.len()
    }

    /// Pilot index whose position equals `m`, if any.
    pub fn pilot_index_of(&self, m: usize) -> Option<usize> {
        self.pilot_positions.binary_search(&m).ok()
    }
}

/// Lays out `n_pilots` unit pilots with disjoint observation windows spread
/// evenly across the frame at spacing `⌊N/N_p⌋`.
///
/// Pilot `i` sits at `m_i = Q + i·⌊N/N_p⌋`, so window `i` covers
/// `[i·⌊N/N_p⌋, i·⌊N/N_p⌋ + W)` with no modular wrap. Even spreading keeps
/// the sensing columns well conditioned: grid points on a common alias
/// diagonal (`q + P_afdm·l` constant) share all their observation rows and
/// differ only by the per-pilot phase ramp `exp(-j2π·Δl·m_i/N)`, so clustered
/// pilots would make such columns nearly parallel, while spacing `N/N_p`
/// drives their inner products to (near) zero. Fails when the windows cannot
/// fit disjointly at that spacing.
pub fn build_pilot_config(cfg: &GridConfig, n_pilots: usize) -> Result<PilotConfig> {
    cfg.validate()?;
    if n_pilots == 0 {
        return Err(DdError::Config("need at least one pilot".into()));
    }
    let b = cfg.doppler_bins();
    let window = b + (cfg.p_afdm as usize) * (cfg.delay_taps - 1);
    let spacing = cfg.frame_len / n_pilots;
    if spacing < window {
        return Err(DdError::Config(format!(
            "{n_pilots} windows of {window} samples do not fit disjointly in a frame of {}",
            cfg.frame_len
        )));
    }
    let starts: Vec<usize> = (0..n_pilots).map(|i| i * spacing).collect();
    let pilot_positions: Vec<usize> = starts.iter().map(|s| s + cfg.max_doppler).collect();
    let mut obs_indices = Vec::with_capacity(n_pilots * window);
    for &s in &starts {
        obs_indices.extend(s..s + window);
    }
    let guard_overhead = zero_leakage_overhead(cfg.frame_len, window, cfg.max_doppler, &starts);
    Ok(PilotConfig {
        n_pilots,
        pilot_positions,
        pilot_values: vec![Complex64::new(1.0, 0.0); n_pilots],
        obs_indices,
        window_size: window,
        guard_overhead,
    })
}

/// Transmit indices that must stay zero so no data symbol leaks into any
/// observation window: a symbol at DAFT index `m` reaches receive indices
/// `[m - Q, m - Q + W)`, so each window forbids a cyclic band of `2W - 1`
/// transmit positions around it; overlapping bands are counted once.
fn zero_leakage_overhead(
    frame_len: usize,
    window: usize,
    max_doppler: usize,
    starts: &[usize],
) -> usize {
    let n = frame_len as i64;
    let mut forbidden = vec![false; frame_len];
    for &s in starts {
        let lo = s as i64 + max_doppler as i64 - window as i64 + 1;
        for off in 0..(2 * window - 1) as i64 {
            forbidden[(lo + off).rem_euclid(n) as usize] = true;
        }
    }
    forbidden.iter().filter(|&&f| f).count()
}

/// DAFT-domain transmit index a receive sample `k` reaches through grid
/// point `(l, q)`: `m = (k - q + 2Nc1·l) mod N`.
pub fn atom_shift_index(cfg: &GridConfig, k: usize, l: usize, q: i64) -> usize {
    let n = cfg.frame_len as i64;
    (k as i64 - q + cfg.two_n_c1() * l as i64).rem_euclid(n) as usize
}

/// Sensing-matrix entry for receive index `k` and grid point `(l, q)`:
/// `exp(j2π(c1·l² - m·l/N + c2·(m² - k²)))·x_m` when `m` lands on a pilot,
/// zero otherwise.
///
/// The phase argument is assembled from exact integers (`m² ≤ N²` fits well
/// inside an i64) before any floating conversion, so atoms are reproducible
/// bit for bit.
pub fn atom_entry(cfg: &GridConfig, pilot: &PilotConfig, k: usize, l: usize, q: i64) -> Complex64 {
    let m = atom_shift_index(cfg, k, l, q);
    match pilot.pilot_index_of(m) {
        None => Complex64::new(0.0, 0.0),
        Some(idx) => {
            let n = cfg.frame_len as f64;
            let l_i = l as i64;
            let m_i = m as i64;
            let k_i = k as i64;
            let l_sq = (l_i * l_i) as f64;
            let ml = (m_i * l_i) as f64;
            let m2k2 = (m_i * m_i - k_i * k_i) as f64;
            let phase = std::f64::consts::TAU * (cfg.c1 * l_sq - ml / n + cfg.c2 * m2k2);
            Complex64::from_polar(1.0, phase) * pilot.pilot_values[idx]
        }
    }
}

/// The `M × LB` delay-Doppler sensing matrix with its index maps.
#[derive(Debug)]
pub struct SensingMatrix {
    cfg: GridConfig,
    pilot: PilotConfig,
    entries: CMat,
    /// Rows of the nonzero entries of each column (at most one per pilot).
    nonzero_rows: Vec<Vec<u32>>,
    gram: OnceLock<CMat>,
}

impl SensingMatrix {
    /// Convenience constructor: pilot layout plus matrix in one call.
    pub fn build(cfg: &GridConfig, n_pilots: usize) -> Result<Self> {
        let pilot = build_pilot_config(cfg, n_pilots)?;
        build_sensing_matrix(cfg, &pilot)
    }

    pub fn cfg(&self) -> &GridConfig {
        &self.cfg
    }

    pub fn pilot(&self) -> &PilotConfig {
        &self.pilot
    }

    pub fn matrix(&self) -> &CMat {
        &self.entries
    }

    /// Observation count `M`.
    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    /// Grid size `L·B`.
    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// Receive index observed by a matrix row.
    pub fn observation_index(&self, row: usize) -> usize {
        self.pilot.obs_indices[row]
    }

    /// Grid point `(l, q)` of a matrix column.
    pub fn column_pair(&self, col: usize) -> (usize, i64) {
        dd_pair(col, self.cfg.max_doppler, self.cfg.doppler_bins())
    }

    pub fn nonzero_rows(&self, col: usize) -> &[u32] {
        &self.nonzero_rows[col]
    }

    /// `MᴴM`, computed once and cached.
    pub fn gram(&self) -> &CMat {
        self.gram.get_or_init(|| self.entries.gram())
    }

    /// `M·α`; zero coefficients are skipped.
    pub fn apply(&self, alpha: &[Complex64]) -> Vec<Complex64> {
        self.entries.matvec(alpha)
    }

    /// `Mᴴ·y` through the per-column nonzero structure.
    pub fn correlate(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.nrows());
        let mut b = vec![Complex64::new(0.0, 0.0); self.ncols()];
        for (j, rows) in self.nonzero_rows.iter().enumerate() {
            let col = self.entries.col(j);
            let mut re = 0.0;
            let mut im = 0.0;
            for &i in rows {
                let a = col[i as usize];
                let v = y[i as usize];
                re += a.re * v.re + a.im * v.im;
                im += a.re * v.im - a.im * v.re;
            }
            b[j] = Complex64::new(re, im);
        }
        b
    }
}

/// Fills the dense sensing matrix entry by entry from [`atom_entry`].
pub fn build_sensing_matrix(cfg: &GridConfig, pilot: &PilotConfig) -> Result<SensingMatrix> {
    cfg.validate()?;
    let m = pilot.observation_count();
    let lb = cfg.grid_cols();
    let b = cfg.doppler_bins();
    let q_max = cfg.max_doppler as i64;
    let mut entries = CMat::zeros(m, lb);
    for l in 0..cfg.delay_taps {
        for qi in 0..b {
            let q = qi as i64 - q_max;
            let col = l * b + qi;
            for (row, &k) in pilot.obs_indices.iter().enumerate() {
                let v = atom_entry(cfg, pilot, k, l, q);
                if v != Complex64::new(0.0, 0.0) {
                    entries.set(row, col, v);
                }
            }
        }
    }
    finish_matrix(*cfg, pilot.clone(), entries)
}

/// Wraps prebuilt entries, recording the nonzero structure.
fn finish_matrix(cfg: GridConfig, pilot: PilotConfig, entries: CMat) -> Result<SensingMatrix> {
    if entries.nrows() != pilot.observation_count() || entries.ncols() != cfg.grid_cols() {
        return Err(DdError::Dimension(format!(
            "matrix is {}×{} but configs imply {}×{}",
            entries.nrows(),
            entries.ncols(),
            pilot.observation_count(),
            cfg.grid_cols()
        )));
    }
    let nonzero_rows: Vec<Vec<u32>> = (0..entries.ncols())
        .map(|j| {
            entries
                .col(j)
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
                .map(|(i, _)| i as u32)
                .collect()
        })
        .collect();
    Ok(SensingMatrix {
        cfg,
        pilot,
        entries,
        nonzero_rows,
        gram: OnceLock::new(),
    })
}

pub(crate) fn from_parts(cfg: GridConfig, pilot: PilotConfig, entries: CMat) -> Result<SensingMatrix> {
    finish_matrix(cfg, pilot, entries)
}

/// A noisy pilot observation `y = M_p·α + w`.
#[derive(Debug, Clone)]
pub struct Observation {
    pub y: Vec<Complex64>,
    pub sigma_w_sq: f64,
    pub snr_db: f64,
}

/// Full-frame SNR convention: `σ_w² = (N_p/N)·10^(-SNR/10)`.
pub fn noise_variance(cfg: &GridConfig, n_pilots: usize, snr_db: f64) -> f64 {
    (n_pilots as f64 / cfg.frame_len as f64) * 10f64.powf(-snr_db / 10.0)
}

/// Synthesizes `y = M_p·α + w` with i.i.d. circular complex Gaussian noise.
///
/// `snr_db = +∞` gives the noiseless observation exactly (no noise draws are
/// consumed from the stream).
pub fn synthesize_observation<R: Rng>(
    mp: &SensingMatrix,
    alpha: &[Complex64],
    snr_db: f64,
    rng: &mut R,
) -> Observation {
    assert_eq!(alpha.len(), mp.ncols(), "coefficient vector length");
    let sigma_w_sq = noise_variance(mp.cfg(), mp.pilot().n_pilots, snr_db);
    let mut y = mp.apply(alpha);
    if sigma_w_sq > 0.0 {
        let std = (sigma_w_sq / 2.0).sqrt();
        for v in y.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v.re += re * std;
            v.im += im * std;
        }
    }
    Observation {
        y,
        sigma_w_sq,
        snr_db,
    }
}
