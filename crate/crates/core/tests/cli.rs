use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ipmdro::cli::{ProblemConfig, Subcommand};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipmdro"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_fixture(cmd: &str, out: &Path) -> Output {
    let cfg = fixture(cmd);
    run(&[
        cmd,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn every_subcommand_runs_its_fixture() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in Subcommand::ALL {
        let out = run_fixture(cmd.name(), dir.path());
        assert!(
            out.status.success(),
            "{}: {}",
            cmd.name(),
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(dir.path().join(format!("{}.csv", cmd.name())).exists());
        let json: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(dir.path().join(format!("{}.json", cmd.name()))).unwrap(),
        )
        .unwrap();
        assert_eq!(json["subcommand"], cmd.name());
    }
}

#[test]
fn fixtures_round_trip() {
    for cmd in Subcommand::ALL {
        let text = fs::read_to_string(fixture(cmd.name())).unwrap();
        let a = ProblemConfig::parse(&text).unwrap();
        let b = ProblemConfig::parse(&a.to_json()).unwrap();
        assert_eq!(a, b, "{}", cmd.name());
        assert_eq!(a.to_json(), b.to_json());
        a.check_fields(cmd).unwrap();
    }
}

#[test]
fn identity_fixture_values() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_fixture("verify-identity", dir.path()).status.success());
    let (h, rows) = csv_rows(&dir.path().join("verify-identity.csv"));
    assert_eq!(rows.len(), 1);
    let get = |c: &str| rows[0][col(&h, c)].parse::<f64>().unwrap();
    assert!((get("lhs") - 1.3).abs() < 1e-9);
    assert!((get("rhs") - 1.3).abs() < 1e-9);
    assert!(get("residual") <= 1e-6);
    assert_eq!(rows[0][col(&h, "pass")], "true");
}

#[test]
fn sweep_has_twenty_rows() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_fixture("sweep-eps", dir.path()).status.success());
    let (h, rows) = csv_rows(&dir.path().join("sweep-eps.csv"));
    assert_eq!(rows.len(), 20);
    let r = col(&h, "residual");
    assert!(rows
        .iter()
        .all(|row| row[r].parse::<f64>().unwrap() <= 1e-6));
    let lhs: Vec<f64> = rows
        .iter()
        .map(|row| row[col(&h, "lhs")].parse().unwrap())
        .collect();
    for (k, v) in lhs.iter().enumerate() {
        let e = 0.1 * (k + 1) as f64;
        let curve = (1.0 + e).min(4.0 / 3.0 + e / 2.0).min(2.0);
        assert!((v - curve).abs() < 1e-6, "eps {e}: {v} vs {curve}");
    }
}

#[test]
fn gan_columns() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_fixture("gan-bound", dir.path()).status.success());
    let (h, rows) = csv_rows(&dir.path().join("gan-bound.csv"));
    for c in ["robust", "plain", "cap", "slack"] {
        col(&h, c);
    }
    assert!(rows
        .iter()
        .all(|row| row[col(&h, "slack")].parse::<f64>().unwrap() >= -1e-7));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for cmd in ["tightness", "dro-sup", "critic-check"] {
        assert!(run_fixture(cmd, a.path()).status.success());
        assert!(run_fixture(cmd, b.path()).status.success());
        for ext in ["csv", "json"] {
            let name = format!("{cmd}.{ext}");
            assert_eq!(
                fs::read(a.path().join(&name)).unwrap(),
                fs::read(b.path().join(&name)).unwrap(),
                "{name}"
            );
        }
    }
}

#[test]
fn seed_flag_changes_tightness_draws() {
    let a = tempfile::tempdir().unwrap();
    let cfg = fixture("tightness");
    let out = run(&[
        "tightness",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        a.path().to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("tightness.json")).unwrap())
            .unwrap();
    assert_eq!(json["seed"], 99);
}

#[test]
fn malformed_metric_row_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(
        &cfg,
        r#"{"schema_version": 1,
            "space": {"points": 3, "metric": [[0, 1, 2], [1, 0, 1], [2, 1]]},
            "distributions": {"p": [0.5, 0.5, 0]},
            "functions": {"h": [0, 1, 2]},
            "class": {"variant": "lipschitz"},
            "epsilon": 0.5,
            "reference": "p"}"#,
    )
    .unwrap();
    let out = run(&[
        "dro-sup",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 2"), "{err}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(
        run(&["ipm", "--config", missing.to_str().unwrap(), "--out", d])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["ipm", "--out", d]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command", "--out", d]).status.code(), Some(2));
    let cfg = fixture("verify-identity");
    let out = run(&[
        "verify-identity",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        d,
        "--tol",
        "-1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let wrong = fixture("ipm");
    let out = run(&["penalty", "--config", wrong.to_str().unwrap(), "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("functions"));
}

#[test]
fn repro_sin_without_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["repro-sin", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let (h, rows) = csv_rows(&dir.path().join("repro-sin.csv"));
    let get = |c: &str| rows[0][col(&h, c)].parse::<f64>().unwrap();
    assert!((2.95..=3.0).contains(&get("eps_lip")));
    assert!(get("lambda_upper") <= 2.001 && get("lambda_lp") <= 2.001);
}
