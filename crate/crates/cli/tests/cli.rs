//! End-to-end tests of the `ddce` binary: interface contract, exit codes,
//! and byte-level determinism of the outputs.

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

fn ddce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddce"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn sweep_writes_deterministic_csv_with_selected_estimators() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let args = |out: &Path| {
        vec![
            "sweep".to_string(),
            "--trials".into(),
            "3".into(),
            "--snr".into(),
            "10,20".into(),
            "--seed".into(),
            "7".into(),
            "--estimators".into(),
            "proposed,oracle".into(),
            "--threads".into(),
            "2".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let run_a = ddce(&args(&out_a).iter().map(String::as_str).collect::<Vec<_>>());
    assert!(run_a.status.success(), "{}", String::from_utf8_lossy(&run_a.stderr));
    let run_b = ddce(&args(&out_b).iter().map(String::as_str).collect::<Vec<_>>());
    assert!(run_b.status.success());

    let csv_a = read(&out_a.join("sweep.csv"));
    let csv_b = read(&out_b.join("sweep.csv"));
    assert_eq!(csv_a, csv_b, "reruns must produce byte-identical CSV");

    let mut lines = csv_a.lines();
    assert_eq!(
        lines.next().unwrap(),
        "snr_db,estimator,mean_nmse,nmse_ci,support_rate,rate_ci,n_trials"
    );
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 4, "2 SNR points × 2 estimators");
    assert!(body.iter().all(|l| l.contains(",proposed,") || l.contains(",oracle,")));

    // the manifest pins the resolved config
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&out_a.join("run-manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "sweep");
    assert_eq!(manifest["master_seed"], 7);
    assert_eq!(manifest["config"]["n_trials"], 3);
    assert_eq!(manifest["outputs"][0], "sweep.csv");
}

#[test]
fn default_sweep_covers_all_five_estimators() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddce(&[
        "sweep",
        "--trials",
        "2",
        "--snr",
        "25",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("sweep.csv"));
    let estimators: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(
        estimators,
        ["proposed", "shared_mean", "shared_tolerant", "sbl", "oracle"]
    );
}

#[test]
fn heatmap_covers_the_pilot_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddce(&[
        "heatmap",
        "--np",
        "2,4",
        "--snr",
        "15",
        "--trials",
        "2",
        "--estimators",
        "proposed",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("heatmap.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "n_p,snr_db,estimator,support_rate,rate_ci");
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 2);
    assert!(body[0].starts_with("2,15,proposed,"));
    assert!(body[1].starts_with("4,15,proposed,"));
}

#[test]
fn noiseless_single_reproduces_the_true_map() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddce(&[
        "single",
        "--seed",
        "12",
        "--noiseless",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = read(&dir.path().join("support_maps.csv"));
    let mut masks: HashMap<String, Vec<(i64, i64, u8)>> = HashMap::new();
    for line in csv.lines().skip(1) {
        let parts: Vec<&str> = line.split(',').collect();
        masks.entry(parts[0].to_string()).or_default().push((
            parts[1].parse().unwrap(),
            parts[2].parse().unwrap(),
            parts[3].parse().unwrap(),
        ));
    }
    assert_eq!(masks.len(), 4);
    for mask in masks.values() {
        assert_eq!(mask.len(), 30 * 15);
    }
    assert_eq!(
        masks["true_support"], masks["proposed"],
        "noiseless proposed map must equal the truth"
    );
    let count = |name: &str| masks[name].iter().filter(|(_, _, on)| *on == 1).count();
    assert_eq!(count("shared_mean"), 18);
    assert_eq!(count("shared_tolerant"), 72);
}

#[test]
fn export_matrix_writes_container_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddce(&["export-matrix", "--np", "2", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = std::fs::read(dir.path().join("sensing_matrix.ddsm")).unwrap();
    assert_eq!(&bytes[..4], b"DDSM");
    let m = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let lb = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    assert_eq!((m, lb), (146, 450));
    assert_eq!(bytes.len(), 12 + m * lb * 16);
    let sidecar: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("sensing_matrix.json"))).unwrap();
    assert_eq!(sidecar["pilot"]["n_pilots"], 2);
    assert!(sidecar["checksum_fnv1a"].is_u64());
}

#[test]
fn selftest_quick_passes() {
    let out = ddce(&["selftest", "--quick"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("ok   family-size-identity"));
    assert!(stdout.contains("ok   noiseless-recovery"));
}

#[test]
fn bad_configs_exit_with_code_two() {
    // missing file
    let out = ddce(&["sweep", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    // unknown key in the config file
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut config: serde_json::Value = serde_json::json!({
        "grid": {
            "frame_len": 4096, "delay_taps": 30, "max_doppler": 7,
            "c1": -0.000244140625, "c2": 0.00001220703125, "p_afdm": 2,
            "delay_activity": 0.2, "doppler_activity": 0.2
        },
        "n_p": 8,
        "snr_db_list": [10.0],
        "n_trials": 1,
        "master_seed": 1,
        "estimators": ["oracle"],
        "lambda_reg": 1e-10,
        "require_nonempty": true
    });
    config["unexpected"] = serde_json::json!(true);
    std::fs::write(&path, config.to_string()).unwrap();
    let out = ddce(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    // unknown estimator name on the command line
    let out = ddce(&["sweep", "--estimators", "omp"]);
    assert_eq!(out.status.code(), Some(2));
}
