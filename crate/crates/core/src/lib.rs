//! Delay-Doppler channel estimation for AFDM.
//!
//! The crate simulates doubly sparse delay-Doppler channels whose support is
//! a Cartesian product of a delay set and a shared Doppler set, builds the
//! AFDM pilot observation model `y = M_p·α + w`, and estimates `α` without
//! knowing how many delays or Dopplers are active: candidate supports are
//! generated from a ridge proxy and the support dimensions are selected by a
//! BIC grid search. Fixed-budget, SBL, and oracle baselines plus a seeded
//! Monte Carlo harness round out the toolkit.
//!
//! ```
//! use ddce_core::{channel, estimators, grid::GridConfig, harness, sensing};
//!
//! let cfg = GridConfig::afdm(256, 6, 2, 2, 1.0 / (20.0 * 256.0), 0.3, 0.4).unwrap();
//! let mp = sensing::SensingMatrix::build(&cfg, 3).unwrap();
//! let mut rng = harness::trial_rng(7, 0);
//! let support = channel::sample_support(&cfg, &mut rng, true).unwrap();
//! let real = channel::sample_gains(&support, &cfg, &mut rng);
//! let obs = sensing::synthesize_observation(&mp, &real.alpha, 25.0, &mut rng);
//! let est = estimators::estimate_proposed(&mp, &obs.y, 1e-10).unwrap();
//! assert_eq!(est.alpha_hat.len(), cfg.grid_cols());
//! ```

pub mod channel;
pub mod error;
pub mod estimators;
pub mod grid;
pub mod harness;
pub mod numerics;
pub mod sensing;

pub use error::{DdError, Result};
pub use grid::GridConfig;
