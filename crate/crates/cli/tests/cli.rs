use std::path::Path;
use std::process::{Command, Output};

fn wpcn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpcn")).args(args).output().unwrap()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        r#"{"devices": 4, "placements": 2, "phy": {"antennas": 2}, "sweep": {"variable": "r", "values": [1, 3]}}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_is_repeatable() {
    let a = wpcn(&["solve", "--seed", "7", "--scheme", "proposed-eb-cooperation"]);
    let b = wpcn(&["solve", "--seed", "7", "--scheme", "proposed-eb-cooperation"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("Optimal"), "{text}");
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"placements": -3}"#).unwrap();
    let out = wpcn(&["sweep", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("placements"), "{err}");
}

#[test]
fn unknown_flag_prints_usage() {
    let out = wpcn(&["sweep", "--frobnicate"]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("Usage"));
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = dir.path().join("rows.csv");
    let status = wpcn(&["sweep", "--quiet", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("sweep_var,sweep_value,scheme"));
    // 2 radii x 3 schemes x 1 strategy
    assert_eq!(lines.len(), 1 + 6);
}

#[test]
fn ch_compare_covers_every_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = wpcn(&["ch-compare", "--quiet", "--config", &config]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for strategy in ["closest-to-center", "closest-to-hap", "random"] {
        assert!(text.contains(strategy), "{text}");
    }
    assert!(!text.contains("independent-eb"));
}

#[test]
fn verify_passes() {
    let out = wpcn(&["verify", "--quiet", "--instances", "2", "--points", "100"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn zero_threads_is_rejected() {
    let out = wpcn(&["verify", "--threads", "0"]);
    assert!(!out.status.success());
}
