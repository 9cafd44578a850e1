//! End-to-end tests of the `scaledrive` binary: flag handling, config
//! precedence, run-directory artifacts, determinism, and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scaledrive(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scaledrive"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        stderr(out)
    );
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stderr: {}\nstdout: {}",
        stderr(out),
        stdout(out)
    );
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = fs::read_to_string(path).expect("file should exist");
    serde_json::from_str(&text).expect("file should be JSON")
}

#[test]
fn design_writes_expected_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scaledrive(
        tmp.path(),
        &["design", "--tF", "5", "--samples", "101", "--seed-dir", "d"],
    );
    assert_ok(&out);

    let csv = fs::read_to_string(tmp.path().join("d/protocol.csv")).unwrap();
    assert_eq!(csv.lines().count(), 102, "header plus one row per sample");
    assert!(csv.starts_with("t,omega,"));

    let config = read_json(&tmp.path().join("d/config.json"));
    assert_eq!(config["command"], "design");
    assert_eq!(config["omega0"], 1.0);
    assert_eq!(config["omegaF"], 0.25);
    assert_eq!(config["gammaF"], 2.0);
    assert_eq!(config["tF"], 5.0);
    assert_eq!(config["samples"], 101);

    let report = read_json(&tmp.path().join("d/report.json"));
    assert_eq!(report["status"], "ok");
    assert!((report["gammaF"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn design_rejects_negative_duration() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scaledrive(tmp.path(), &["design", "--tF", "-1", "--seed-dir", "d"]);
    assert_exit(&out, 2);
    assert!(
        stderr(&out).contains("tF"),
        "error should name the bad flag: {}",
        stderr(&out)
    );
    assert!(!tmp.path().join("d").exists(), "no dir on invalid input");
}

#[test]
fn design_dimension_two_tf_drive_matches_cd_drive() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scaledrive(
        tmp.path(),
        &["design", "--dim", "2", "--tF", "2", "--samples", "101", "--seed-dir", "d"],
    );
    assert_ok(&out);

    let csv = fs::read_to_string(tmp.path().join("d/protocol.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i_cd = header.iter().position(|&c| c == "Omega2").unwrap();
    let i_tf = header.iter().position(|&c| c == "Omega2_TF").unwrap();
    // The two drive constructions coincide at D = 2; compare numerically,
    // not textually, since their operation orders round differently.
    for line in lines {
        let fields: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let scale = fields[i_cd].abs().max(1.0);
        assert!(
            (fields[i_cd] - fields[i_tf]).abs() <= 1e-12 * scale,
            "Omega2 {} vs Omega2_TF {} differ beyond rounding",
            fields[i_cd],
            fields[i_tf]
        );
    }
}

#[test]
fn simulate_cd_beats_bare() {
    let tmp = tempfile::tempdir().unwrap();
    let small = [
        "--tF", "1", "--grid-points", "512", "--box-length", "40", "--dt", "2e-3",
        "--samples", "2001",
    ];

    let mut cd_args = vec!["simulate"];
    cd_args.extend_from_slice(&small);
    cd_args.extend_from_slice(&["--seed-dir", "cd"]);
    let out = scaledrive(tmp.path(), &cd_args);
    assert_ok(&out);
    let report = read_json(&tmp.path().join("cd/report.json"));
    assert_eq!(report["status"], "ok");
    assert!(report["fid_target_final"].as_f64().unwrap() >= 0.999);
    for name in ["config.json", "protocol.csv", "observables.csv", "report.json"] {
        assert!(tmp.path().join("cd").join(name).exists(), "missing {name}");
    }

    let mut bare_args = vec!["simulate"];
    bare_args.extend_from_slice(&small);
    bare_args.extend_from_slice(&["--drive", "bare", "--seed-dir", "bare"]);
    let out = scaledrive(tmp.path(), &bare_args);
    assert_ok(&out);
    let report = read_json(&tmp.path().join("bare/report.json"));
    assert!(report["fid_target_final"].as_f64().unwrap() < 0.95);
}

#[test]
fn simulate_snapshots_flag_writes_states() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scaledrive(
        tmp.path(),
        &[
            "simulate", "--tF", "1", "--grid-points", "256", "--box-length", "40",
            "--dt", "2e-3", "--samples", "1001", "--snapshots", "--seed-dir", "s",
        ],
    );
    assert_ok(&out);
    for name in [
        "initial.csv", "initial.json", "final.csv", "final.json", "target.csv", "target.json",
    ] {
        assert!(
            tmp.path().join("s/snapshots").join(name).exists(),
            "missing snapshot {name}"
        );
    }
    let meta = read_json(&tmp.path().join("s/snapshots/final.json"));
    assert_eq!(meta["n_points"], 256);
}

#[test]
fn simulate_rejects_bad_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scaledrive(
        tmp.path(),
        &["simulate", "--grid-points", "1000", "--seed-dir", "s"],
    );
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("power of two"));
}

#[test]
fn simulate_records_numerical_failure() {
    // A 10-length box cannot hold the gammaF = 2 expanded state; the
    // support guard should fail the run and leave an error report behind.
    let tmp = tempfile::tempdir().unwrap();
    let out = scaledrive(
        tmp.path(),
        &[
            "simulate", "--tF", "1", "--grid-points", "256", "--box-length", "10",
            "--dt", "2e-3", "--samples", "1001", "--seed-dir", "s",
        ],
    );
    assert_exit(&out, 3);
    let report = read_json(&tmp.path().join("s/report.json"));
    assert_eq!(report["status"], "error");
    assert_eq!(report["exit_code"], 3);
    assert!(report["error"].as_str().unwrap().contains("support"));
}

#[test]
fn seed_dir_refuses_overwrite_without_force() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["design", "--tF", "2", "--samples", "11", "--seed-dir", "d"];
    assert_ok(&scaledrive(tmp.path(), &args));

    let out = scaledrive(tmp.path(), &args);
    assert_exit(&out, 2);
    assert!(
        stderr(&out).contains("--force"),
        "refusal should mention --force: {}",
        stderr(&out)
    );

    let mut forced = args.to_vec();
    forced.push("--force");
    assert_ok(&scaledrive(tmp.path(), &forced));
}

#[test]
fn identical_invocations_are_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for dir in ["a", "b"] {
        let out = scaledrive(
            tmp.path(),
            &[
                "simulate", "--tF", "1", "--grid-points", "256", "--box-length", "40",
                "--dt", "2e-3", "--samples", "1001", "--seed-dir", dir,
            ],
        );
        assert_ok(&out);
    }
    for name in ["observables.csv", "protocol.csv", "config.json"] {
        let a = fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    // Reports match up to wall time.
    let mut a = read_json(&tmp.path().join("a/report.json"));
    let mut b = read_json(&tmp.path().join("b/report.json"));
    for report in [&mut a, &mut b] {
        report.as_object_mut().unwrap().remove("runtime_seconds");
    }
    assert_eq!(a, b, "report.json differs beyond runtime");
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("run.json"),
        r#"{"tF": 2.0, "samples": 501}"#,
    )
    .unwrap();
    let out = scaledrive(
        tmp.path(),
        &["design", "--config", "run.json", "--tF", "1", "--seed-dir", "d"],
    );
    assert_ok(&out);
    let config = read_json(&tmp.path().join("d/config.json"));
    assert_eq!(config["tF"], 1.0, "flag wins over file");
    assert_eq!(config["samples"], 501, "file wins over default");
}

#[test]
fn config_file_errors_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scaledrive(
        tmp.path(),
        &["design", "--config", "missing.json", "--seed-dir", "d"],
    );
    assert_exit(&out, 4);
    assert!(stderr(&out).contains("missing.json"));

    fs::write(tmp.path().join("bad.json"), r#"{"omega_final": 1.0}"#).unwrap();
    let out = scaledrive(
        tmp.path(),
        &["design", "--config", "bad.json", "--seed-dir", "d"],
    );
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("bad.json"));
}

#[test]
fn figure1_writes_one_csv_per_duration() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scaledrive(tmp.path(), &["figure1", "--samples", "201", "--seed-dir", "f"]);
    assert_ok(&out);
    for name in ["figure1_tF25.csv", "figure1_tF5.csv", "figure1_tF1.csv"] {
        assert!(tmp.path().join("f").join(name).exists(), "missing {name}");
    }
    let report = read_json(&tmp.path().join("f/report.json"));
    let curves = report["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 3);
    let fastest = curves.iter().find(|c| c["tF"] == 1.0).unwrap();
    assert_eq!(fastest["inverts_trap"], true);
    let slowest = curves.iter().find(|c| c["tF"] == 25.0).unwrap();
    assert_eq!(slowest["inverts_trap"], false);
}

#[test]
fn sweep_tabulates_both_drives() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scaledrive(
        tmp.path(),
        &[
            "sweep", "--tF", "1", "--grid-points", "512", "--box-length", "40",
            "--dt", "2e-3", "--samples", "2001", "--seed-dir", "w",
        ],
    );
    assert_ok(&out);
    let csv = fs::read_to_string(tmp.path().join("w/sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("tF,fidelity_cd,fidelity_bare,max_oracle_dev"));
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(row[1] >= 0.999, "CD fidelity {}", row[1]);
    assert!(row[2] < 0.95, "bare fidelity {}", row[2]);
}

#[test]
fn piston_noop_run_stays_put() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scaledrive(
        tmp.path(),
        &[
            "piston", "--tF", "1", "--expansion", "1", "--grid-points", "256",
            "--box-length", "16", "--dt", "1e-3", "--samples", "401", "--seed-dir", "p",
        ],
    );
    assert_ok(&out);
    let report = read_json(&tmp.path().join("p/report.json"));
    assert_eq!(report["status"], "ok");
    assert!(report["fid_target_final"].as_f64().unwrap() > 0.99);
    assert!((report["gammaF"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let csv = fs::read_to_string(tmp.path().join("p/protocol.csv")).unwrap();
    assert!(csv.starts_with("t,xi,"));
}

#[test]
fn piston_rejects_soft_exponent_text() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scaledrive(tmp.path(), &["piston", "--b", "squishy", "--seed-dir", "p"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("piston"), "hint the keyword: {}", stderr(&out));
}

#[test]
fn piston_hard_wall_sentinel_is_analytic_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scaledrive(tmp.path(), &["piston", "--b", "piston", "--seed-dir", "p"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("finite b"), "{}", stderr(&out));
    // The refusal is still recorded in the run directory.
    let report = read_json(&tmp.path().join("p/report.json"));
    assert_eq!(report["status"], "error");
    assert_eq!(report["exit_code"], 2);
}

#[test]
fn validate_quick_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scaledrive(tmp.path(), &["validate", "--quick", "--seed-dir", "v"]);
    assert_ok(&out);
    let text = stdout(&out);
    assert!(text.contains("PASS"), "stdout: {text}");
    assert!(!text.contains("FAIL "), "stdout: {text}");
    let report = read_json(&tmp.path().join("v/report.json"));
    assert_eq!(report["all_passed"], true);
    assert_eq!(report["quick"], true);
}

#[test]
fn help_spells_out_units() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scaledrive(tmp.path(), &["simulate", "--help"]);
    assert_ok(&out);
    let text = stdout(&out);
    assert!(text.contains("1/omega0"), "help should state units: {text}");
    assert!(text.contains("--gammaF"));

    let out = scaledrive(tmp.path(), &[]);
    assert_exit(&out, 2);
}
