use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cqed_cli::{CliError, Kind, Scenario};

fn cqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqed")).args(args).output().expect("binary runs")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn every_shipped_scenario_parses_and_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let mut kinds = Vec::new();
    for entry in fs::read_dir(scenario("")).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let s = Scenario::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        kinds.push(s.kind);
        let out = tmp.path().join(path.file_stem().unwrap());
        let report = cqed_cli::run(&path, &out).unwrap();
        let failed: Vec<_> = report.assertions.iter().filter(|a| !a.passed).map(|a| &a.name).collect();
        assert!(report.passed, "{}: {failed:?}", path.display());
        for t in &report.tables {
            assert!(out.join(&t.file).exists());
        }
    }
    for k in Kind::ALL {
        assert!(kinds.contains(&k), "no example for {k}");
    }
}

#[test]
fn error_sweep_matches_the_documented_example() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let status = cqed(&["run", scenario("effective_error_sweep.json").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("error_sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.split('\n').collect();
    assert_eq!(lines[0], "detuning,max_infidelity,leakage");
    assert_eq!(lines.len(), 5, "header, three rows, trailing newline");
    assert_eq!(lines[4], "");
    assert!(!csv.contains('\r'));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let row30 = report["assertions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["name"].as_str().unwrap().starts_with("row delta=30"))
        .unwrap();
    assert_eq!(row30["passed"], true);
}

#[test]
fn verify_circuits_example_has_ten_passing_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let report = cqed_cli::run(&scenario("verify_circuits.json"), tmp.path()).unwrap();
    let table = report.tables.iter().find(|t| t.name == "circuits").unwrap();
    assert_eq!(table.rows.len(), 10);
    let csv = fs::read_to_string(tmp.path().join("circuits.csv")).unwrap();
    assert_eq!(csv.lines().skip(1).filter(|l| l.ends_with(",pass")).count(), 10);
    let text = fs::read_to_string(tmp.path().join("circuit_t4_improved.txt")).unwrap();
    assert_eq!(cqed_core::Circuit64::parse(&text).unwrap().counts().pcet_class, 6);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["verify_circuits.json", "effective_error_sweep.json", "pair_evolution.json"] {
        let a = tmp.path().join("a");
        let b = tmp.path().join("b");
        for out in [&a, &b] {
            let o = cqed(&["run", scenario(name).to_str().unwrap(), "-o", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0), "{name}");
        }
        for entry in fs::read_dir(&a).unwrap() {
            let file = entry.unwrap().file_name();
            if file == "metadata.json" {
                continue;
            }
            assert_eq!(fs::read(a.join(&file)).unwrap(), fs::read(b.join(&file)).unwrap(), "{name}: {file:?}");
        }
    }
}

#[test]
fn malformed_json_exits_with_parse_code() {
    let tmp = tempfile::tempdir().unwrap();
    let f = write(tmp.path(), "bad.json", "# header\n{\n  \"kind\": \"blockade\",\n  \"omega1\": [1,\n}\n");
    let o = cqed(&["run", f.to_str().unwrap(), "-o", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));
}

#[test]
fn wrong_type_names_line_and_field() {
    let err = Scenario::parse("{\n\"kind\": \"transistor\",\n\"time_grid\": {\"t_max\": 1, \"points\": \"many\"}\n}").unwrap_err();
    match err {
        CliError::Parse { line, field, .. } => {
            assert_eq!(line, 3);
            assert_eq!(field.as_deref(), Some("time_grid.points"));
        }
        other => panic!("{other}"),
    }
    assert_eq!(CliError::Parse { line: 1, column: 1, field: None, message: String::new() }.exit_code(), 2);
}

#[test]
fn missing_omega_sigma_exits_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    let f = write(
        tmp.path(),
        "missing.json",
        r#"{"kind": "blockade", "omega1": 0.001, "omega2": 0.002, "atoms1": 1, "atoms2": 1, "photons": 0,
            "time_grid": {"t_max": 10, "points": 10}}"#,
    );
    let o = cqed(&["run", f.to_str().unwrap(), "-o", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("omega_sigma"));
}

#[test]
fn failed_assertion_exits_with_four_and_still_writes_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    // One photon but nothing detunes the swap enough: the bound cannot hold.
    let f = write(
        tmp.path(),
        "leaky.json",
        r#"{"kind": "blockade", "omega1": 0.001, "omega2": 0.001, "omega_sigma": 0.001, "atoms1": 1,
            "atoms2": 1, "photons": 1, "max_transfer_below": 1e-3, "time_grid": {"t_max": 3000, "points": 200}}"#,
    );
    let out = tmp.path().join("o");
    let o = cqed(&["run", f.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn unknown_kind_is_rejected() {
    let o = cqed(&["describe", "warp-drive"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown scenario kind"));
    let tmp = tempfile::tempdir().unwrap();
    let f = write(tmp.path(), "k.json", r#"{"kind": "warp-drive"}"#);
    let o = cqed(&["run", f.to_str().unwrap(), "-o", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn missing_file_is_an_internal_error() {
    let o = cqed(&["run", "/definitely/not/here.json", "-o", "/tmp/unused"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn list_and_describe() {
    let o = cqed(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    let o = cqed(&["describe", "blockade"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for field in ["omega1", "omega2", "omega_sigma", "atoms1", "atoms2", "photons", "time_grid"] {
        let line = text.lines().find(|l| l.trim_start().starts_with(field)).unwrap_or_else(|| panic!("{field}"));
        assert!(line.contains("required"), "{line}");
    }
}
