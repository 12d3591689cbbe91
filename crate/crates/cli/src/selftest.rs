//! Fast invariant suite: structural identities and a seeded noiseless
//! recovery check, runnable on a fresh build without any config.

use std::process::ExitCode;

use clap::Args;
use num_complex::Complex64;

use ddce_core::channel::{sample_gains, sample_support};
use ddce_core::estimators::{structured_family_size, StructuredEstimator};
use ddce_core::grid::{dd_index, dd_pair, GridConfig};
use ddce_core::harness::trial_rng;
use ddce_core::numerics::{binomial, norm_sqr, restricted_ls};
use ddce_core::sensing::{io, synthesize_observation, SensingMatrix};
use ddce_core::DdError;

#[derive(Args)]
pub struct SelftestArgs {
    /// Keep the run under a few seconds (fewer recovery trials)
    #[arg(long)]
    quick: bool,
}

type Check = (&'static str, Result<(), String>);

pub fn run(args: &SelftestArgs) -> Result<ExitCode, DdError> {
    let cfg = GridConfig::default();
    let mp = SensingMatrix::build(&cfg, 8)?;
    let trials = if args.quick { 5 } else { 20 };

    let checks: Vec<Check> = vec![
        ("family-size-identity", family_size_identity()),
        ("dd-index-round-trip", dd_index_round_trip(&cfg)),
        ("atom-unit-modulus", atom_unit_modulus(&mp)),
        ("empty-model-rss", empty_model_rss(&mp)),
        ("matrix-container-checksum", container_checksum(&mp)),
        ("noiseless-recovery", noiseless_recovery(&cfg, &mp, trials)),
    ];

    let mut failures = 0;
    for (name, outcome) in &checks {
        match outcome {
            Ok(()) => println!("ok   {name}"),
            Err(msg) => {
                failures += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    if failures == 0 {
        println!("selftest: {} checks passed", checks.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("selftest: {failures} of {} checks failed", checks.len());
        Ok(ExitCode::from(3))
    }
}

fn family_size_identity() -> Result<(), String> {
    let structured = structured_family_size(30, 15, 6, 3)
        .ok_or("structured family size overflowed")?;
    if structured != 270_167_625 {
        return Err(format!("C(30,6)·C(15,3) = {structured}"));
    }
    let unstructured = binomial(450, 18).ok_or("C(450,18) overflowed")?;
    if structured >= unstructured {
        return Err(format!("{structured} !< {unstructured}"));
    }
    Ok(())
}

fn dd_index_round_trip(cfg: &GridConfig) -> Result<(), String> {
    let b = cfg.doppler_bins();
    for col in 0..cfg.grid_cols() {
        let (l, q) = dd_pair(col, cfg.max_doppler, b);
        let back = dd_index(l, q, cfg.max_doppler, b).map_err(|e| e.to_string())?;
        if back != col {
            return Err(format!("column {col} → ({l}, {q}) → {back}"));
        }
    }
    Ok(())
}

fn atom_unit_modulus(mp: &SensingMatrix) -> Result<(), String> {
    let n_p = mp.pilot().n_pilots as f64;
    for j in 0..mp.ncols() {
        for &i in mp.nonzero_rows(j) {
            let v = mp.matrix().get(i as usize, j);
            if (v.norm() - 1.0).abs() > 1e-12 {
                return Err(format!("entry ({i}, {j}) has modulus {}", v.norm()));
            }
        }
        let nrm = norm_sqr(mp.matrix().col(j));
        if (nrm - n_p).abs() > 1e-9 {
            return Err(format!("column {j} norm² = {nrm}, expected {n_p}"));
        }
    }
    Ok(())
}

fn empty_model_rss(mp: &SensingMatrix) -> Result<(), String> {
    let mut rng = trial_rng(123, 0);
    let cfg = mp.cfg();
    let support = sample_support(cfg, &mut rng, true).map_err(|e| e.to_string())?;
    let real = sample_gains(&support, cfg, &mut rng);
    let obs = synthesize_observation(mp, &real.alpha, 10.0, &mut rng);
    let fit = restricted_ls(mp.matrix(), &obs.y, &[]).map_err(|e| e.to_string())?;
    let direct = norm_sqr(&obs.y);
    if fit.rss.to_bits() != direct.to_bits() {
        return Err(format!("rss(∅) = {} but ‖y‖² = {direct}", fit.rss));
    }
    Ok(())
}

fn container_checksum(mp: &SensingMatrix) -> Result<(), String> {
    let dir = std::env::temp_dir().join(format!("ddce-selftest-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let bin = dir.join("m.ddsm");
    let sidecar = dir.join("m.json");
    let result = (|| -> Result<(), String> {
        io::export_matrix(mp, &bin, &sidecar).map_err(|e| e.to_string())?;
        io::import_matrix(&bin, &sidecar).map_err(|e| format!("clean import failed: {e}"))?;
        let mut bytes = std::fs::read(&bin).map_err(|e| e.to_string())?;
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x01;
        std::fs::write(&bin, &bytes).map_err(|e| e.to_string())?;
        match io::import_matrix(&bin, &sidecar) {
            Err(DdError::Format(_)) => Ok(()),
            Err(other) => Err(format!("corruption raised the wrong error: {other}")),
            Ok(_) => Err("corrupted container imported cleanly".into()),
        }
    })();
    let _ = std::fs::remove_dir_all(&dir);
    result
}

fn noiseless_recovery(cfg: &GridConfig, mp: &SensingMatrix, trials: u64) -> Result<(), String> {
    let estimator = StructuredEstimator::new(mp, 1e-10).map_err(|e| e.to_string())?;
    for trial in 0..trials {
        let mut rng = trial_rng(2024, trial);
        let support = sample_support(cfg, &mut rng, true).map_err(|e| e.to_string())?;
        let real = sample_gains(&support, cfg, &mut rng);
        let obs = synthesize_observation(mp, &real.alpha, f64::INFINITY, &mut rng);
        let est = estimator.proposed(mp, &obs.y).map_err(|e| e.to_string())?;
        if est.support != support {
            return Err(format!(
                "trial {trial}: estimated ({:?} × {:?}), true ({:?} × {:?})",
                est.support.delays(),
                est.support.dopplers(),
                support.delays(),
                support.dopplers()
            ));
        }
        let err: f64 = est
            .alpha_hat
            .iter()
            .zip(&real.alpha)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale = real
            .alpha
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt();
        if err > 1e-8 * scale {
            return Err(format!("trial {trial}: coefficient error {}", err / scale));
        }
    }
    Ok(())
}
