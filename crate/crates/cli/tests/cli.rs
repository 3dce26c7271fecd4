use std::fs;
use std::path::Path;
use std::process::Command;

use szilard_cli::{cmd_cycle, cmd_density, cmd_qbl, cmd_sweep, CliError, DensityArgs, RunConfig, SweepWhich};
use szilard_core::Occupancy;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_szilard"))
}

fn config_in(dir: &Path) -> RunConfig {
    RunConfig {
        out: dir.to_path_buf(),
        workers: Some(2),
        ..RunConfig::default()
    }
}

/// A small, fast 2D setup.
fn small_config(dir: &Path) -> RunConfig {
    RunConfig {
        lx_nm: 8.0,
        ly_nm: 4.0,
        grid_nm: 0.2,
        points: 9,
        ..config_in(dir)
    }
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn cycle_in_kt_units_shows_ln2_measurement() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["cycle", "--units", "kt", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("cycle_ledger.txt")).unwrap();
    let w = table.lines().find(|l| l.starts_with("W ")).unwrap();
    let cells: Vec<f64> = w.split_whitespace().skip(1).map(|v| v.parse().unwrap()).collect();
    assert_eq!(format!("{:.6}", cells[1]), "0.693147");
    assert_eq!(cells[4], 0.0);
    assert!(table.contains(": pass"));
    assert!(!table.contains("-0.000000e0"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("cycle_report.json")).unwrap()).unwrap();
    assert_eq!(report["results"]["invariants_pass"], true);
    assert_eq!(report["results"]["steps"][1]["work"], std::f64::consts::LN_2);
    assert_eq!(report["constants"]["h"], 6.62607015e-34);
    assert!(dir.path().join("timings.json").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| bin().args(args).arg("--out").arg(dir.path()).output().unwrap().status.code();
    assert_eq!(code(&["cycle", "--temp-k", "0"]), Some(2));
    assert_eq!(code(&["cycle", "--temp-k", "-3"]), Some(2));
    assert_eq!(code(&["sweep", "insert", "--points", "0"]), Some(2));
    assert_eq!(code(&["sweep", "sideways"]), Some(2));
    assert_eq!(code(&["density", "--d", "50"]), Some(2));
    assert_eq!(code(&["cycle", "--units", "furlongs"]), Some(2));
    // the first localized point leaves a two-cell compartment
    assert_eq!(code(&["sweep", "expand-localized", "--points", "3", "--lx-nm", "1", "--ly-nm", "1", "--grid-nm", "0.25"]), Some(4));
}

#[test]
fn config_file_and_override_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"temp_k": 150.0, "lx_nm": 30.0, "units": "zj"}"#).unwrap();
    let out = bin().args(["cycle", "--temp-k", "600", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("cycle_report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["temp_k"], 600.0);
    assert_eq!(report["config"]["lx_nm"], 30.0);
    assert_eq!(report["results"]["unit"], "zJ");

    fs::write(&cfg, r#"{"temperature": 150.0}"#).unwrap();
    let out = bin().args(["cycle", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["cycle", "--config"]).arg(dir.path().join("missing.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn insertion_sweep_csv_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let report = cmd_sweep(&cfg, SweepWhich::Insert).unwrap();
    assert_eq!(report.results["summary"]["free_energy_non_decreasing"], true);
    let csv = fs::read_to_string(dir.path().join("sweep_insert.csv")).unwrap();
    let lines = data_lines(&csv);
    assert_eq!(lines[0], "abscissa_nm,F_J,S_J_per_K,U_J");
    assert_eq!(lines.len(), 1 + cfg.points);
    let f: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(f.windows(2).all(|w| w[1] >= w[0]));
    let d_last: f64 = lines[cfg.points].split(',').next().unwrap().parse().unwrap();
    assert_eq!(d_last, 4.0);
}

#[test]
fn superposed_sweep_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_sweep(&small_config(dir.path()), SweepWhich::ExpandSuperposed).unwrap();
    assert!(report.results["summary"]["max_relative_asymmetry"].as_f64().unwrap() < 1e-10);
}

#[test]
fn failed_points_are_flagged() {
    let dir = tempfile::tempdir().unwrap();
    // at 0.25 nm the centre of a 2 nm box is 4 cells in, of a 1 nm box 2
    let cfg = RunConfig {
        lx_nm: 2.0,
        ly_nm: 1.0,
        grid_nm: 0.25,
        points: 3,
        ..config_in(dir.path())
    };
    assert!(cmd_sweep(&cfg, SweepWhich::ExpandLocalized).is_ok());
    let cfg = RunConfig { lx_nm: 1.0, ly_nm: 1.0, ..cfg };
    let err = cmd_sweep(&cfg, SweepWhich::ExpandLocalized).unwrap_err();
    assert!(matches!(err, CliError::PointsFailed { failed: 1, total: 3 }));
    assert_eq!(err.exit_code(), 4);
    let csv = fs::read_to_string(dir.path().join("sweep_expand-localized.csv")).unwrap();
    assert!(data_lines(&csv)[1].contains("NaN"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep_expand-localized_report.json")).unwrap()).unwrap();
    assert_eq!(report["results"]["failures"][0]["index"], 0);
}

#[test]
fn density_of_full_insertion_is_mirror_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let report = cmd_density(
        &cfg,
        DensityArgs {
            depth_nm: 4.0,
            position_nm: 4.0,
            occupancy: Occupancy::FullBox,
        },
    )
    .unwrap();
    let r = &report.results;
    assert!((r["integral"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((r["left_weight"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((r["right_weight"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    let csv = fs::read_to_string(dir.path().join("density_d4_l4.csv")).unwrap();
    let lines = data_lines(&csv);
    assert_eq!(lines[0], "x_nm,y_nm,density_per_nm2");
    assert_eq!(lines.len(), 1 + 41 * 21);
}

#[test]
fn density_without_partition_integrates_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_density(
        &small_config(dir.path()),
        DensityArgs {
            depth_nm: 0.0,
            position_nm: 4.0,
            occupancy: Occupancy::FullBox,
        },
    )
    .unwrap();
    assert!((report.results["integral"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn qbl_flags_overlap_and_embeds_delta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        qbl_lengths_nm: vec![3.0, 5.0, 20.0],
        qbl_temps_k: vec![300.0],
        ..config_in(dir.path())
    };
    let report = cmd_qbl(&cfg).unwrap();
    let r = &report.results;
    assert!((r["delta_300k_nm"].as_f64().unwrap() - 1.0759).abs() < 1e-4);
    assert_eq!(r["rows"][0]["status"], "out-of-validity");
    assert_eq!(r["rows"][1]["status"], "near-validity-boundary");
    assert_eq!(r["rows"][2]["status"], "ok");
    assert!(r["rows"][2]["work_rel_error"].as_f64().unwrap() < 1e-6);
    let table = fs::read_to_string(dir.path().join("qbl_table.txt")).unwrap();
    assert!(table.contains("out-of-validity"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let files = ["sweep_insert.csv", "sweep_insert_report.json"];
    for (dir, workers) in [(&a, 1), (&b, 3)] {
        let cfg = RunConfig {
            workers: Some(workers),
            ..small_config(dir.path())
        };
        cmd_sweep(&cfg, SweepWhich::Insert).unwrap();
        cmd_cycle(&cfg).unwrap();
    }
    for f in files.iter().chain(&["cycle_ledger.txt", "cycle_report.json"]) {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
    let csv = fs::read_to_string(a.path().join("sweep_insert.csv")).unwrap();
    let hash = small_config(a.path()).hash();
    assert!(csv.starts_with("# szilard"));
    assert!(csv.contains(&format!("# config_sha256 {hash}")));
    assert!(csv.contains("# constants h=6.62607015e-34"));
}
