use std::fs;
use std::process::{Command, Output};

fn asirk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asirk")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_prints_the_classification() {
    let o = asirk(&["verify", "ASIRK-LSe(3,2)"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("ASIRK-LSe(3,2)") && text.contains("Eq14"), "{text}");

    let o = asirk(&["verify", "Zhong", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.is_object());
}

#[test]
fn unknown_scheme_is_a_validation_error() {
    let o = asirk(&["verify", "no-such-scheme"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn exported_scheme_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = asirk(&["export", "scheme", "ASIRK-LSs(3,2)"]);
    assert_eq!(o.status.code(), Some(0));
    let path = dir.path().join("lss.json");
    fs::write(&path, &o.stdout).unwrap();
    let from_file = asirk(&["verify", path.to_str().unwrap()]);
    let from_catalog = asirk(&["verify", "ASIRK-LSs(3,2)"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(stdout(&from_file), stdout(&from_catalog));
}

#[test]
fn integrate_writes_a_hashed_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = asirk(&["integrate", "ASIRK-LSe(3,2)", "prototype", "--eps", "1/100", "--h", "1/20", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config-hash: "));
    lines.next().unwrap();
    assert_eq!(lines.count(), 21);
    let report: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(report["core_registers"], 3);
    assert_eq!(report["steps"], 20);
}

#[test]
fn integrate_rejects_a_non_integer_interval_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = asirk(&["integrate", "Zhong", "prototype", "--h", "0.3", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unreachable_inner_tolerance_is_a_numerical_failure() {
    let o = asirk(&["integrate", "ASIRK-LSe(3,2)", "van-der-pol", "--eps", "1e-3", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("did not converge"));
}

#[test]
fn bad_numbers_are_rejected() {
    let o = asirk(&["integrate", "Zhong", "prototype", "--eps", "abc"]);
    assert_eq!(o.status.code(), Some(2));
    let o = asirk(&["integrate", "Zhong", "prototype", "--eps", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn family_members_match_the_catalog() {
    let o = asirk(&["family", "s3", "--omega1", "3/20", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("149/280") && text.contains("89/280"), "{text}");
    let o = asirk(&["family", "s3", "--omega1", "1/2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stability_scan_writes_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("region.csv");
    let o = asirk(&["stability", "ASIRK-LSe(3,2)", "--nx", "20", "--ny", "10", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().count() >= 200);
}

#[test]
fn suite_runs_a_config_and_reports_bad_ones() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    fs::write(&config, "[[verify]]\nschemes = [\"Zhong\", \"IMEX-SSP2(3,3,2)\"]\n").unwrap();
    let out = dir.path().join("out");
    let o = asirk(&["suite", config.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("summary.json").is_file());
    assert!(out.join("verify_Zhong.json").is_file());

    fs::write(&config, "[[verify]]\nschemes = [\"Zhong\"]\ntypo = true\n").unwrap();
    let o = asirk(&["suite", config.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tiny.toml"));
}

#[test]
fn export_initial_field() {
    let o = asirk(&["export", "initial", "broadwell", "--eps", "1e-2", "--variant", "WP_InVal"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().count() > 30);
}
