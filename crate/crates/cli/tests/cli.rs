use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"{
  "name": "small",
  "domain": { "kind": "disc", "radius": 1.0 },
  "obstacle": { "kind": "square-modulus", "terms": [ { "coef": -1.0, "exp": [1] } ] },
  "points": [ [[0.2, 0.0]], [[0.0, -0.3]] ],
  "budget": { "max_degree": 2, "multistarts": 3, "max_evals_per_start": 150 },
  "oracle_grid": { "spacing": 0.05 }
}"#;

fn pshenv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pshenv"))
        .current_dir(dir)
        .env_remove("PSHENV_OUT_DIR")
        .args(args)
        .output()
        .unwrap()
}

fn with_config(body: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("c.json"), body).unwrap();
    dir
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn envelope_writes_report_config_and_csv() {
    let dir = with_config(SMALL);
    let o = pshenv(dir.path(), &["envelope", "--config", "c.json", "--out", "out"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("wall time"));
    let out = dir.path().join("out");
    let csv = fs::read_to_string(out.join("envelope.csv")).unwrap();
    assert_eq!(csv.matches("\r\n").count(), 3);
    assert!(csv.starts_with("z1_re,z1_im,z2_re,z2_im,inf_side,sup_side,gap,"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "envelope");
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
    assert_eq!(report["oracle"]["method"], "planar");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = with_config(SMALL);
    for out in ["a", "b"] {
        let o = pshenv(dir.path(), &["envelope", "--config", "c.json", "--out", out, "--threads", "2"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for file in ["report.json", "config.json", "envelope.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = with_config(SMALL);
    let o = pshenv(dir.path(), &["envelope", "--config", "c.json", "--out", "first", "--seed", "11"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let echo: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("first/config.json")).unwrap()).unwrap();
    assert_eq!(echo["seed"], 11);
    assert_eq!(echo["budget"]["seed"], 11);
    let o = pshenv(dir.path(), &["envelope", "--config", "first/config.json", "--out", "second"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        fs::read(dir.path().join("first/report.json")).unwrap(),
        fs::read(dir.path().join("second/report.json")).unwrap()
    );
}

#[test]
fn out_dir_comes_from_the_environment() {
    let dir = with_config(SMALL);
    let o = Command::new(env!("CARGO_BIN_EXE_pshenv"))
        .current_dir(dir.path())
        .env("PSHENV_OUT_DIR", "from-env")
        .args(["oracle", "--config", "c.json", "--format", "csv"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("from-env");
    assert!(out.join("oracle.csv").exists());
    assert!(out.join("config.json").exists());
    assert!(!out.join("report.json").exists());
}

#[test]
fn json_format_skips_tables() {
    let dir = with_config(SMALL);
    let o = pshenv(dir.path(), &["envelope", "--config", "c.json", "--out", "o", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("o/report.json").exists());
    assert!(!dir.path().join("o/envelope.csv").exists());
}

#[test]
fn singular_point_is_a_precondition_error() {
    let dir = with_config(
        r#"{
  "name": "singular",
  "domain": { "kind": "disc", "radius": 1.0 },
  "potential": { "atoms": [ { "weight": 1.0, "poly": [ { "coef": [1.0, 0.0], "exp": [1] } ] } ] },
  "points": [ [[0.0, 0.0]] ]
}"#,
    );
    let o = pshenv(dir.path(), &["envelope", "--config", "c.json", "--out", "o"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("in singular set"), "{}", stderr(&o));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn schema_errors_name_the_field() {
    let dir = with_config(r#"{ "name": "bad", "domain": { "kind": "disc", "radius": 1.0 }, "budget": { "max_degree": "eight" } }"#);
    let o = pshenv(dir.path(), &["envelope", "--config", "c.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("budget.max_degree"), "{}", stderr(&o));

    let dir = with_config(r#"{ "name": "bad", "domain": { "kind": "disc", "radius": 1.0 }, "colour": 3 }"#);
    let o = pshenv(dir.path(), &["envelope", "--config", "c.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_two() {
    let dir = with_config(SMALL);
    assert_eq!(pshenv(dir.path(), &["envelope"]).status.code(), Some(2));
    assert_eq!(pshenv(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(pshenv(dir.path(), &["envelope", "--config", "missing.json"]).status.code(), Some(2));
    assert_eq!(pshenv(dir.path(), &["envelope", "--config", "c.json", "--threads", "0"]).status.code(), Some(2));
    assert_eq!(pshenv(dir.path(), &["extremal", "--config", "c.json"]).status.code(), Some(2));
    assert_eq!(pshenv(dir.path(), &["hull", "--config", "c.json"]).status.code(), Some(2));
}

#[test]
fn unknown_suite_exits_two() {
    let dir = with_config(
        r#"{ "name": "v", "domain": { "kind": "disc", "radius": 1.0 }, "verify": { "suites": ["parseval", "telepathy"] } }"#,
    );
    let o = pshenv(dir.path(), &["verify", "--config", "c.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("telepathy"));
}

#[test]
fn empty_suite_list_passes() {
    let dir = with_config(r#"{ "name": "v", "domain": { "kind": "disc", "radius": 1.0 }, "verify": { "suites": [] } }"#);
    let o = pshenv(dir.path(), &["verify", "--config", "c.json", "--out", "o"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("o/verify.csv")).unwrap();
    assert_eq!(csv, "suite,samples,failures,max_residual,tolerance,passed\r\n");
}

#[test]
fn closed_form_suites_pass() {
    let dir = with_config(
        r#"{
  "name": "v",
  "domain": { "kind": "disc", "radius": 1.0 },
  "verify": {
    "suites": ["riesz-identity", "jensen", "parseval"],
    "samples": { "riesz-identity": 10, "jensen": 10, "parseval": 10 }
  }
}"#,
    );
    let o = pshenv(dir.path(), &["verify", "--config", "c.json", "--out", "o"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("o/verify.csv")).unwrap();
    assert_eq!(csv.matches(",true\r\n").count(), 3, "{csv}");
}

#[test]
fn hull_separates_an_outside_point() {
    let dir = with_config(
        r#"{
  "name": "h",
  "domain": { "kind": "full-space", "dim": 1 },
  "hull": { "compact": { "kind": "circle", "center": [0.0, 0.0], "radius": 0.5 }, "radii": [0.2], "epsilons": [0.1] },
  "budget": { "max_degree": 1, "multistarts": 2, "max_evals_per_start": 100 },
  "points": [ [[0.8, 0.0]] ]
}"#,
    );
    let o = pshenv(dir.path(), &["hull", "--config", "c.json", "--out", "o"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("o/hull.csv")).unwrap();
    assert!(csv.contains(",non-member,separator "), "{csv}");
}
