//! Doubly sparse delay-Doppler channel synthesis.
//!
//! The support follows a Cartesian-product (shared-Doppler) model: a delay
//! set and a Doppler set are drawn independently as Bernoulli processes and
//! every active delay is active on every active Doppler bin. Active gains
//! are i.i.d. circularly-symmetric complex Gaussian with variance chosen so
//! that the expected total channel power is one.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{DdError, Result};
use crate::grid::GridConfig;

/// A delay set and a Doppler set whose Cartesian product is the DD support.
///
/// Both sets are kept sorted ascending and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPattern {
    delays: Vec<usize>,
    dopplers: Vec<i64>,
}

impl SupportPattern {
    pub fn new(mut delays: Vec<usize>, mut dopplers: Vec<i64>, cfg: &GridConfig) -> Result<Self> {
        delays.sort_unstable();
        delays.dedup();
        dopplers.sort_unstable();
        dopplers.dedup();
        if let Some(&l) = delays.last() {
            if l >= cfg.delay_taps {
                return Err(DdError::Range(format!(
                    "delay {l} outside [0, {})",
                    cfg.delay_taps
                )));
            }
        }
        let q_max = cfg.max_doppler as i64;
        if dopplers.iter().any(|&q| q < -q_max || q > q_max) {
            return Err(DdError::Range(format!(
                "doppler set outside [-{q_max}, {q_max}]"
            )));
        }
        Ok(SupportPattern { delays, dopplers })
    }

    pub fn empty() -> Self {
        SupportPattern {
            delays: Vec::new(),
            dopplers: Vec::new(),
        }
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    pub fn dopplers(&self) -> &[i64] {
        &self.dopplers
    }

    /// `K_d`, the number of active delay taps.
    pub fn delay_count(&self) -> usize {
        self.delays.len()
    }

    /// `K_D`, the number of active Doppler bins.
    pub fn doppler_count(&self) -> usize {
        self.dopplers.len()
    }

    /// True when the product support contains no grid point.
    pub fn is_empty(&self) -> bool {
        self.delays.is_empty() || self.dopplers.is_empty()
    }

    /// Flat column indices of the product support, ascending.
    pub fn product_columns(&self, cfg: &GridConfig) -> Vec<usize> {
        let b = cfg.doppler_bins();
        let q_max = cfg.max_doppler as i64;
        let mut cols = Vec::with_capacity(self.delays.len() * self.dopplers.len());
        for &l in &self.delays {
            for &q in &self.dopplers {
                cols.push(l * b + (q + q_max) as usize);
            }
        }
        cols
    }
}

/// A support pattern together with the dense coefficient vector it induces.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub support: SupportPattern,
    /// Dense DD coefficient vector of length `L·B`; zero off-support.
    pub alpha: Vec<Complex64>,
    /// Per-coefficient gain variance used to draw the active entries.
    pub sigma_alpha_sq: f64,
}

impl ChannelRealization {
    pub fn total_power(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Draws a support pattern: each delay is active with probability `p_d`,
/// each Doppler bin with probability `p_D`, all independent.
///
/// With `require_nonempty` the whole pattern is rejection-resampled until
/// both sets are non-empty; that is unsatisfiable when either probability
/// is zero.
pub fn sample_support<R: Rng>(
    cfg: &GridConfig,
    rng: &mut R,
    require_nonempty: bool,
) -> Result<SupportPattern> {
    if require_nonempty && (cfg.delay_activity == 0.0 || cfg.doppler_activity == 0.0) {
        return Err(DdError::Unsatisfiable(
            "non-empty support requested with zero activity probability".into(),
        ));
    }
    // Hard cap so a denormal probability cannot loop forever.
    for _ in 0..1_000_000 {
        let delays: Vec<usize> = (0..cfg.delay_taps)
            .filter(|_| rng.random::<f64>() < cfg.delay_activity)
            .collect();
        let q_max = cfg.max_doppler as i64;
        let dopplers: Vec<i64> = (-q_max..=q_max)
            .filter(|_| rng.random::<f64>() < cfg.doppler_activity)
            .collect();
        if !require_nonempty || (!delays.is_empty() && !dopplers.is_empty()) {
            return Ok(SupportPattern { delays, dopplers });
        }
    }
    Err(DdError::Unsatisfiable(
        "failed to draw a non-empty support within the resampling budget".into(),
    ))
}

/// Draws the active gains for a support pattern.
///
/// Each product-support entry gets an independent `CN(0, σ_α²)` gain with
/// `σ_α² = 1/(p_d·p_D·L·B)`; real and imaginary parts are drawn in `(l, q)`
/// lexicographic order so a fixed random stream reproduces the realization
/// exactly.
pub fn sample_gains<R: Rng>(
    support: &SupportPattern,
    cfg: &GridConfig,
    rng: &mut R,
) -> ChannelRealization {
    let sigma_alpha_sq = cfg.gain_variance();
    let std = (sigma_alpha_sq / 2.0).sqrt();
    let mut alpha = vec![Complex64::new(0.0, 0.0); cfg.grid_cols()];
    for &col in &support.product_columns(cfg) {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        alpha[col] = Complex64::new(re * std, im * std);
    }
    ChannelRealization {
        support: support.clone(),
        alpha,
        sigma_alpha_sq,
    }
}

/// Time-varying gain of delay tap `l` at time index `n`:
/// `h_{l,n} = Σ_q α_{l,q}·exp(j2πnq/N)`.
///
/// Validation helper only; the simulator itself works in the compact
/// observation model.
pub fn time_varying_gain(
    real: &ChannelRealization,
    cfg: &GridConfig,
    l: usize,
    n: i64,
) -> Complex64 {
    assert!(l < cfg.delay_taps, "delay {l} outside [0, {})", cfg.delay_taps);
    let b = cfg.doppler_bins();
    let q_max = cfg.max_doppler as i64;
    let mut h = Complex64::new(0.0, 0.0);
    for q in -q_max..=q_max {
        let a = real.alpha[l * b + (q + q_max) as usize];
        if a != Complex64::new(0.0, 0.0) {
            let phase = std::f64::consts::TAU * (n as f64) * (q as f64) / (cfg.frame_len as f64);
            h += a * Complex64::from_polar(1.0, phase);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_cfg(p_d: f64, p_dop: f64) -> GridConfig {
        GridConfig::afdm(64, 3, 1, 2, 0.0, p_d, p_dop).unwrap()
    }

    #[test]
    fn all_active_when_probability_one() {
        let cfg = small_cfg(1.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_support(&cfg, &mut rng, false).unwrap();
        assert_eq!(s.delays(), &[0, 1, 2]);
        assert_eq!(s.dopplers(), &[-1, 0, 1]);
    }

    #[test]
    fn empty_doppler_when_probability_zero() {
        let cfg = small_cfg(1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_support(&cfg, &mut rng, false).unwrap();
        assert_eq!(s.delays(), &[0, 1, 2]);
        assert!(s.dopplers().is_empty());
        assert!(s.is_empty());
    }

    #[test]
    fn nonempty_with_zero_probability_is_unsatisfiable() {
        let cfg = small_cfg(1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            sample_support(&cfg, &mut rng, true),
            Err(DdError::Unsatisfiable(_))
        ));
    }

    #[test]
    fn mean_support_sizes_match_activity() {
        // E[K_d] = p_d·L = 6 and E[K_D] = p_D·B = 3 for the reference grid.
        let cfg = GridConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let trials = 100_000;
        let mut sum_d = 0usize;
        let mut sum_q = 0usize;
        for _ in 0..trials {
            let s = sample_support(&cfg, &mut rng, false).unwrap();
            sum_d += s.delay_count();
            sum_q += s.doppler_count();
        }
        let mean_d = sum_d as f64 / trials as f64;
        let mean_q = sum_q as f64 / trials as f64;
        assert!((mean_d - 6.0).abs() < 0.05, "mean K_d = {mean_d}");
        assert!((mean_q - 3.0).abs() < 0.05, "mean K_D = {mean_q}");
    }

    #[test]
    fn indicator_independence() {
        // Pairwise indicator covariances vanish within sampling error.
        let cfg = GridConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 100_000usize;
        let l_taps = cfg.delay_taps;
        let b = cfg.doppler_bins();
        let mut d_count = vec![0u32; l_taps];
        let mut d_pair = vec![0u32; l_taps * l_taps];
        let mut q_count = vec![0u32; b];
        let mut q_pair = vec![0u32; b * b];
        for _ in 0..trials {
            let s = sample_support(&cfg, &mut rng, false).unwrap();
            for &l in s.delays() {
                d_count[l] += 1;
                for &l2 in s.delays() {
                    d_pair[l * l_taps + l2] += 1;
                }
            }
            for &q in s.dopplers() {
                let i = (q + cfg.max_doppler as i64) as usize;
                q_count[i] += 1;
                for &q2 in s.dopplers() {
                    let j = (q2 + cfg.max_doppler as i64) as usize;
                    q_pair[i * b + j] += 1;
                }
            }
        }
        let n = trials as f64;
        // Sampling sd of the empirical covariance of two independent
        // Bernoulli(p) indicators. With ~540 pairs tested, a 3σ bound would
        // flag a pair or two by chance, so each pair is held to 4.5σ and the
        // average |cov| to a tight bound.
        let p = 0.2;
        let sd = (p * p * (1.0 - p) * (1.0 - p) / n).sqrt();
        let mut max_cov = 0.0f64;
        let mut sum_cov = 0.0f64;
        let mut pairs = 0usize;
        for a in 0..l_taps {
            for b2 in a + 1..l_taps {
                let cov = d_pair[a * l_taps + b2] as f64 / n
                    - (d_count[a] as f64 / n) * (d_count[b2] as f64 / n);
                max_cov = max_cov.max(cov.abs());
                sum_cov += cov.abs();
                pairs += 1;
            }
        }
        for a in 0..b {
            for b2 in a + 1..b {
                let cov = q_pair[a * b + b2] as f64 / n
                    - (q_count[a] as f64 / n) * (q_count[b2] as f64 / n);
                max_cov = max_cov.max(cov.abs());
                sum_cov += cov.abs();
                pairs += 1;
            }
        }
        assert!(max_cov < 4.5 * sd, "max |cov| = {max_cov}, sd = {sd}");
        assert!(sum_cov / (pairs as f64) < 1.5 * sd);
    }

    #[test]
    fn gains_only_on_product_support() {
        let cfg = GridConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_support(&cfg, &mut rng, true).unwrap();
        let real = sample_gains(&s, &cfg, &mut rng);
        let cols = s.product_columns(&cfg);
        for (j, a) in real.alpha.iter().enumerate() {
            if cols.binary_search(&j).is_ok() {
                assert!(a.norm_sqr() > 0.0, "active entry {j} is zero");
            } else {
                assert_eq!(*a, Complex64::new(0.0, 0.0), "inactive entry {j} nonzero");
            }
        }
    }

    #[test]
    fn empty_support_gives_zero_vector() {
        let cfg = GridConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let real = sample_gains(&SupportPattern::empty(), &cfg, &mut rng);
        assert!(real.alpha.iter().all(|a| *a == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn reference_gain_variance() {
        let cfg = GridConfig::default();
        assert!((cfg.gain_variance() - 1.0 / 18.0).abs() < 1e-16);
    }

    #[test]
    fn mean_channel_power_is_normalized() {
        let cfg = GridConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 100_000;
        let mut total = 0.0;
        for _ in 0..trials {
            let s = sample_support(&cfg, &mut rng, false).unwrap();
            let real = sample_gains(&s, &cfg, &mut rng);
            total += real.total_power();
        }
        let mean = total / trials as f64;
        assert!((mean - 1.0).abs() < 0.05, "E[‖α‖²] = {mean}");
    }

    #[test]
    fn time_varying_gain_cases() {
        let cfg = small_cfg(1.0, 1.0);
        let mut real = sample_gains(&SupportPattern::empty(), &cfg, &mut ChaCha8Rng::seed_from_u64(0));
        for l in 0..cfg.delay_taps {
            for n in [0i64, 1, 17] {
                assert_eq!(time_varying_gain(&real, &cfg, l, n), Complex64::new(0.0, 0.0));
            }
        }
        // single zero-Doppler coefficient is time invariant
        let c = Complex64::new(0.3, -1.2);
        real.alpha[cfg.column_of(1, 0).unwrap()] = c;
        for n in [0i64, 5, 63] {
            let h = time_varying_gain(&real, &cfg, 1, n);
            assert!((h - c).norm() < 1e-15);
        }
        // exp(j·2π·q·N/N) = 1: evaluating at n = N reproduces the sum of gains
        real.alpha[cfg.column_of(1, 1).unwrap()] = Complex64::new(1.0, 0.0);
        let h = time_varying_gain(&real, &cfg, 1, cfg.frame_len as i64);
        assert!((h - (c + Complex64::new(1.0, 0.0))).norm() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let cfg = GridConfig::default();
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let s = sample_support(&cfg, &mut rng, true).unwrap();
            sample_gains(&s, &cfg, &mut rng)
        };
        let a = draw();
        let b = draw();
        assert_eq!(a.support, b.support);
        assert_eq!(a.alpha, b.alpha);
    }

    #[test]
    fn support_pattern_validates_ranges() {
        let cfg = small_cfg(0.5, 0.5);
        assert!(SupportPattern::new(vec![3], vec![0], &cfg).is_err());
        assert!(SupportPattern::new(vec![0], vec![2], &cfg).is_err());
        let s = SupportPattern::new(vec![2, 0, 2], vec![1, -1], &cfg).unwrap();
        assert_eq!(s.delays(), &[0, 2]);
        assert_eq!(s.dopplers(), &[-1, 1]);
    }
}
