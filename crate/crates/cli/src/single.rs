//! One seeded realization: true support versus the proposed and fixed-budget
//! estimates, printed as delay×Doppler ASCII masks and written as CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;

use ddce_core::channel::{sample_gains, sample_support, SupportPattern};
use ddce_core::estimators::StructuredEstimator;
use ddce_core::grid::GridConfig;
use ddce_core::harness::{trial_rng, ExperimentConfig};
use ddce_core::sensing::{synthesize_observation, SensingMatrix};
use ddce_core::DdError;

#[derive(Args)]
pub struct SingleArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// SNR in dB for the one realization
    #[arg(long, default_value_t = 20.0)]
    snr: f64,
    /// Use a noiseless observation
    #[arg(long)]
    noiseless: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

struct Map<'a> {
    name: &'a str,
    slug: &'a str,
    support: SupportPattern,
}

fn mask(cfg: &GridConfig, support: &SupportPattern) -> Vec<Vec<bool>> {
    let b = cfg.doppler_bins();
    let q_max = cfg.max_doppler as i64;
    let mut grid = vec![vec![false; b]; cfg.delay_taps];
    for &l in support.delays() {
        for &q in support.dopplers() {
            grid[l][(q + q_max) as usize] = true;
        }
    }
    grid
}

fn print_map(cfg: &GridConfig, map: &Map) {
    let grid = mask(cfg, &map.support);
    println!(
        "{} ({} delays × {} dopplers = {} cells)",
        map.name,
        map.support.delay_count(),
        map.support.doppler_count(),
        map.support.delay_count() * map.support.doppler_count()
    );
    println!("    doppler {}..{}", -(cfg.max_doppler as i64), cfg.max_doppler);
    for (l, row) in grid.iter().enumerate() {
        let line: String = row.iter().map(|&on| if on { '#' } else { '.' }).collect();
        println!("l={l:>2} {line}");
    }
    println!();
}

pub fn run(args: &SingleArgs) -> Result<ExitCode, DdError> {
    let config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let seed = args.seed.unwrap_or(config.master_seed);
    let snr_db = if args.noiseless { f64::INFINITY } else { args.snr };
    let cfg = config.grid;
    let n_p = config.n_p.single()?;

    let mp = SensingMatrix::build(&cfg, n_p)?;
    let estimator = StructuredEstimator::new(&mp, config.lambda_reg)?;
    let mut rng = trial_rng(seed, 0);
    let support = sample_support(&cfg, &mut rng, config.require_nonempty)?;
    let real = sample_gains(&support, &cfg, &mut rng);
    let obs = synthesize_observation(&mp, &real.alpha, snr_db, &mut rng);

    let mean_d = (cfg.delay_activity * cfg.delay_taps as f64).round() as usize;
    let mean_r = (cfg.doppler_activity * cfg.doppler_bins() as f64).round() as usize;
    let proposed = estimator.proposed(&mp, &obs.y)?;
    let shared_mean = estimator.fixed(&mp, &obs.y, mean_d, mean_r)?;
    let shared_tolerant = estimator.fixed(
        &mp,
        &obs.y,
        (2 * mean_d).min(cfg.delay_taps),
        (2 * mean_r).min(cfg.doppler_bins()),
    )?;

    println!(
        "seed {seed}, snr {} dB, proposed (d̂, r̂) = ({}, {})\n",
        obs.snr_db, proposed.d_hat, proposed.r_hat
    );
    let maps = [
        Map { name: "true support", slug: "true_support", support: support.clone() },
        Map { name: "proposed", slug: "proposed", support: proposed.support.clone() },
        Map { name: "shared-mean", slug: "shared_mean", support: shared_mean.support.clone() },
        Map {
            name: "shared-tolerant",
            slug: "shared_tolerant",
            support: shared_tolerant.support.clone(),
        },
    ];
    for map in &maps {
        print_map(&cfg, map);
    }

    std::fs::create_dir_all(&args.out)?;
    let mut csv = String::from("map,delay,doppler,active\n");
    for map in &maps {
        let grid = mask(&cfg, &map.support);
        for (l, row) in grid.iter().enumerate() {
            for (c, &on) in row.iter().enumerate() {
                let q = c as i64 - cfg.max_doppler as i64;
                csv.push_str(&format!("{},{l},{q},{}\n", map.slug, u8::from(on)));
            }
        }
    }
    std::fs::write(args.out.join("support_maps.csv"), csv)?;
    crate::write_manifest(&args.out, "single", &config, None, &["support_maps.csv"])?;
    println!("wrote {}", args.out.join("support_maps.csv").display());
    Ok(ExitCode::SUCCESS)
}
