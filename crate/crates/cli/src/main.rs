//! `ddce` — delay-Doppler channel estimation simulator.
//!
//! Subcommands map to the standard experiment set: `sweep` (NMSE and
//! support-recovery versus SNR), `heatmap` (recovery over the (N_p, SNR)
//! plane), `single` (one seeded realization with ASCII support maps),
//! `export-matrix` (binary sensing-matrix container), and `selftest`.
//! Every run writes a `run-manifest.json` capturing the resolved config so
//! outputs are reproducible from the manifest alone.

mod selftest;
mod single;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ddce_core::harness::{
    run_heatmap_with_progress, run_sweep_with_progress, EstimatorKind, ExperimentConfig, NpSpec,
};
use ddce_core::sensing::{io, SensingMatrix};
use ddce_core::DdError;

#[derive(Parser)]
#[command(name = "ddce", version, about = "Delay-Doppler channel estimation simulator for AFDM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Average NMSE and exact-support recovery versus SNR (writes sweep.csv)
    Sweep(RunArgs),
    /// Exact-support recovery over the (N_p, SNR) plane (writes heatmap.csv)
    Heatmap(RunArgs),
    /// One seeded realization; prints true/estimated support maps
    Single(single::SingleArgs),
    /// Export the sensing matrix as a binary container plus JSON sidecar
    ExportMatrix(ExportArgs),
    /// Run the fast invariant suite
    Selftest(selftest::SelftestArgs),
}

#[derive(Args, Clone)]
pub struct RunArgs {
    /// Experiment config JSON; defaults to the reference setup
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the trial count
    #[arg(long)]
    trials: Option<usize>,
    /// Override the master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the SNR list (dB), comma separated
    #[arg(long, value_delimiter = ',')]
    snr: Option<Vec<f64>>,
    /// Override the pilot count(s), comma separated
    #[arg(long, value_delimiter = ',')]
    np: Option<Vec<usize>>,
    /// Override the estimator set, comma separated
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<String>>,
    /// Replace the SNR list with a single noiseless point
    #[arg(long)]
    noiseless: bool,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: one per CPU)
    #[arg(long)]
    threads: Option<usize>,
}

/// Exit codes: 0 ok, 2 configuration error, 3 numeric/runtime error.
fn exit_code_for(err: &DdError) -> u8 {
    match err {
        DdError::Config(_) | DdError::Format(_) | DdError::Range(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Heatmap(args) => cmd_heatmap(&args),
        Command::Single(args) => single::run(&args),
        Command::ExportMatrix(args) => cmd_export_matrix(&args),
        Command::Selftest(args) => selftest::run(&args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

impl RunArgs {
    /// File config (or the default) with flag overrides applied on top.
    pub fn resolve(&self) -> Result<ExperimentConfig, DdError> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(trials) = self.trials {
            config.n_trials = trials;
        }
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(snr) = &self.snr {
            config.snr_db_list = snr.clone();
        }
        if self.noiseless {
            config.snr_db_list = vec![f64::INFINITY];
        }
        if let Some(np) = &self.np {
            config.n_p = match np.as_slice() {
                [one] => NpSpec::One(*one),
                many => NpSpec::Many(many.to_vec()),
            };
        }
        if let Some(names) = &self.estimators {
            config.estimators = names
                .iter()
                .map(|s| s.parse::<EstimatorKind>())
                .collect::<Result<_, _>>()?;
        }
        config.validate()?;
        Ok(config)
    }
}

pub fn write_manifest(
    out_dir: &Path,
    command: &str,
    config: &ExperimentConfig,
    threads: Option<usize>,
    outputs: &[&str],
) -> Result<(), DdError> {
    let manifest = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "master_seed": config.master_seed,
        "threads": threads,
        "config": config,
        "outputs": outputs,
    });
    std::fs::write(
        out_dir.join("run-manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(())
}

fn cmd_sweep(args: &RunArgs) -> Result<ExitCode, DdError> {
    let config = args.resolve()?;
    std::fs::create_dir_all(&args.out)?;
    let table = run_sweep_with_progress(&config, args.threads, |done, total| {
        eprintln!("sweep: snr point {done}/{total}");
    })?;
    std::fs::write(args.out.join("sweep.csv"), table.to_csv())?;
    write_manifest(&args.out, "sweep", &config, args.threads, &["sweep.csv"])?;
    println!("wrote {}", args.out.join("sweep.csv").display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_heatmap(args: &RunArgs) -> Result<ExitCode, DdError> {
    let config = args.resolve()?;
    std::fs::create_dir_all(&args.out)?;
    let table = run_heatmap_with_progress(&config, args.threads, |done, total| {
        eprintln!("heatmap: cell {done}/{total}");
    })?;
    std::fs::write(args.out.join("heatmap.csv"), table.to_csv())?;
    write_manifest(&args.out, "heatmap", &config, args.threads, &["heatmap.csv"])?;
    println!("wrote {}", args.out.join("heatmap.csv").display());
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct ExportArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pilot count for the exported matrix
    #[arg(long)]
    np: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn cmd_export_matrix(args: &ExportArgs) -> Result<ExitCode, DdError> {
    let config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let n_p = match args.np {
        Some(n) => n,
        None => config.n_p.single()?,
    };
    std::fs::create_dir_all(&args.out)?;
    let mp = SensingMatrix::build(&config.grid, n_p)?;
    let bin = args.out.join("sensing_matrix.ddsm");
    let sidecar = args.out.join("sensing_matrix.json");
    io::export_matrix(&mp, &bin, &sidecar)?;
    write_manifest(
        &args.out,
        "export-matrix",
        &config,
        None,
        &["sensing_matrix.ddsm", "sensing_matrix.json"],
    )?;
    println!(
        "wrote {} ({}×{}) and sidecar",
        bin.display(),
        mp.nrows(),
        mp.ncols()
    );
    Ok(ExitCode::SUCCESS)
}
