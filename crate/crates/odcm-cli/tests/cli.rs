//! End-to-end tests of the `odcm` binary: exit codes, artifact layout, and
//! the stability of the CSV contracts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_odcm"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn small_sweep_config() -> &'static str {
    r#"{
        "version": 1,
        "name": "cli-test",
        "spectrum": { "type": "lorentzian", "gamma": 1.0, "t_c": 1.0 },
        "t_total": 10.0,
        "grid_points": 256,
        "energies": [10.0, 20.0],
        "dd": { "nu_pulse": 1.0 }
    }"#
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited without a code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn sweep_emits_the_contracted_artifacts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.json", small_sweep_config());
    let out_dir = tmp.path().join("out");

    let out = bin().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let sweep = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(
        sweep.lines().next().unwrap(),
        "E_requested,E_realized,R_opt,R_dd,R_dd_refined,R_unmod,normalized_opt,normalized_dd,converged,residual"
    );
    assert_eq!(sweep.lines().count(), 3, "header plus one row per energy");

    let field = fs::read_to_string(out_dir.join("field_E10.csv")).unwrap();
    assert_eq!(field.lines().next().unwrap(), "t,omega,phi");
    let overlay = fs::read_to_string(out_dir.join("overlay_E20.csv")).unwrap();
    assert_eq!(overlay.lines().next().unwrap(), "omega,G,F_opt,F_dd");

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["version"], 1);
    assert_eq!(report["points"].as_array().unwrap().len(), 2);

    let svg = fs::read_to_string(out_dir.join("sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(fs::read_to_string(out_dir.join("overlay_E10.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn solve_requires_a_single_energy() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.json", small_sweep_config());
    let out = bin().args(["solve", "--config"]).arg(&cfg).arg("--out").arg(tmp.path().join("out")).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("exactly one energy"), "stderr: {}", stderr(&out));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.json",
        r#"{
            "version": 1,
            "name": "bad",
            "spectrum": { "type": "lorentzian", "gamma": 1.0, "t_c": 1.0 },
            "t_total": 10.0,
            "grid_points": 128,
            "energies": [10.0],
            "surprise": true
        }"#,
    );
    let out = bin().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(tmp.path().join("out")).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("surprise"), "stderr: {}", stderr(&out));
}

#[test]
fn unsupported_version_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.json",
        &small_sweep_config().replacen("\"version\": 1", "\"version\": 2", 1),
    );
    let out = bin().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(tmp.path().join("out")).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("version"), "stderr: {}", stderr(&out));
}

#[test]
fn missing_config_flag_is_a_config_error() {
    let out = bin().arg("sweep").output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--config"), "stderr: {}", stderr(&out));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let out = bin()
        .args(["sweep", "--config"])
        .arg(tmp.path().join("nope.json"))
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn all_points_failing_exits_three() {
    // an energy this small leaves the initial guess at the flat-phase
    // critical point, so the solver rejects every point
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.json",
        r#"{
            "version": 1,
            "name": "degenerate",
            "spectrum": { "type": "lorentzian", "gamma": 1.0, "t_c": 1.0 },
            "t_total": 10.0,
            "grid_points": 128,
            "energies": [1e-300]
        }"#,
    );
    let out = bin().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(tmp.path().join("out")).output().unwrap();
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("all sweep points failed"), "stderr: {}", stderr(&out));
}

#[test]
fn unwritable_output_directory_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.json", small_sweep_config());
    // a plain file where the output directory should go
    let blocker = tmp.path().join("blocked");
    fs::write(&blocker, "in the way").unwrap();
    let out = bin().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(&blocker).output().unwrap();
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out));
}

#[test]
fn reruns_are_bit_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.json", small_sweep_config());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = bin().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(dir).output().unwrap();
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    }
    for name in ["sweep.csv", "report.json", "field_E10.csv", "field_E20.csv", "overlay_E10.csv"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs between reruns"
        );
    }
}

#[test]
fn seed_override_reaches_the_monte_carlo_section() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.json",
        r#"{
            "version": 1,
            "name": "mc-seed",
            "spectrum": { "type": "lorentzian", "gamma": 1.0, "t_c": 1.0 },
            "t_total": 10.0,
            "grid_points": 256,
            "energies": [20.0],
            "mc": { "realizations": 200, "seed": 42, "grid_points": 64 }
        }"#,
    );
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["validate-mc", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .args(["--seed", "7"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["mc"][0]["seed"], 7);
    let mc = fs::read_to_string(out_dir.join("mc.csv")).unwrap();
    assert!(mc.lines().count() >= 2);
}
