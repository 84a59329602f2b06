use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cliffverify(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cliffverify"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("CLIFFVERIFY_THREADS", t),
        None => cmd.env_remove("CLIFFVERIFY_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const CHEAP: &str = r#"{
  "name": "cheap",
  "signature": { "p": 2, "q": 0 },
  "epsilon": 1,
  "seed": 42,
  "checks": ["clifford", "modules", "lichnerowicz", "lambda_law", "klein_gordon", "doubling", "pauli_witness"],
  "samples": 3
}"#;

#[test]
fn empty_config_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let cfg = configs().join("empty.json");
    let o = cliffverify(&["run", cfg.to_str().unwrap(), "--out", &out], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("empty.report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], Value::Bool(true));
    let csv = std::fs::read_to_string(dir.path().join("empty.report.csv")).unwrap();
    assert!(csv.starts_with("scenario,check,status,residual,tolerance,samples,wall_time_s"));
}

#[test]
fn unusable_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let cases = [
        ("corrupt.json", r#"{ "signature": { "p": 3, "q": 1 }, "epsilon": 1, "#),
        ("unknown_check.json", r#"{ "signature": { "p": 3, "q": 1 }, "epsilon": 1, "seed": 0, "checks": ["nope"] }"#),
        ("small_capacity.json", r#"{ "signature": { "p": 3, "q": 1 }, "epsilon": 1, "seed": 0, "checks": [], "band": 2, "capacity": 9 }"#),
        ("odd_dimension.json", r#"{ "signature": { "p": 2, "q": 1 }, "epsilon": 1, "seed": 0, "checks": [] }"#),
        ("bad_epsilon.json", r#"{ "signature": { "p": 3, "q": 1 }, "epsilon": 2, "seed": 0, "checks": [] }"#),
        ("unknown_field.json", r#"{ "signature": { "p": 3, "q": 1 }, "epsilon": 1, "seed": 0, "checks": [], "extra": 1 }"#),
        ("bad_tolerance.json", r#"{ "signature": { "p": 3, "q": 1 }, "epsilon": 1, "seed": 0, "checks": ["clifford"], "tolerances": { "clifford": 0 } }"#),
    ];
    for (name, body) in cases {
        let cfg = write(dir.path(), name, body);
        let o = cliffverify(&["run", &cfg, "--out", &out], None);
        assert_eq!(code(&o), 2, "{name}: {}", String::from_utf8_lossy(&o.stdout));
        assert!(!o.stderr.is_empty(), "{name} should explain itself");
    }
    let o = cliffverify(&["run", "/nonexistent/config.json"], None);
    assert_eq!(code(&o), 2);
    let o = cliffverify(&["list-checks"], Some("zero"));
    assert_eq!(code(&o), 2);
}

#[test]
fn literal_lambda_route_comparison_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let cfg = configs().join("lambda_routes.json");
    let o = cliffverify(&["run", cfg.to_str().unwrap(), "--out", &out], None);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("lambda_routes.report.json")).unwrap()).unwrap();
    let checks = report["scenarios"][0]["checks"].as_array().unwrap();
    let status = |id: &str| checks.iter().find(|c| c["id"] == id).unwrap()["status"].clone();
    assert_eq!(status("lambda_routes"), "fail");
    assert_eq!(status("lambda_law"), "pass");
}

#[test]
fn coefficient_table_has_exact_rationals() {
    let o = cliffverify(&["coefficients", "--n-max", "4", "--format", "json"], None);
    assert_eq!(code(&o), 0);
    let rows: Value = serde_json::from_slice(&o.stdout).unwrap();
    let find = |n: i64, eps: i64, id: &str, conv: &str| {
        rows.as_array()
            .unwrap()
            .iter()
            .find(|r| r["n"] == n && r["epsilon"] == eps && r["identity"] == id && r["convention"] == conv)
            .cloned()
            .unwrap()
    };
    let pauli = find(4, 1, "pauli", "display");
    assert_eq!((pauli["yang_mills"].as_str(), pauli["higgs_kinetic"].as_str()), (Some("1"), Some("9/4")));
    assert_eq!((pauli["quartic"].as_str(), pauli["quadratic"].as_str()), (Some("27/8"), Some("2")));
    let signed = find(4, -1, "pauli", "signed");
    assert_eq!(signed["higgs_kinetic"], "9/4");
    let pi = find(4, 1, "pi", "signed");
    assert_eq!((pi["yang_mills"].as_str(), pi["higgs_kinetic"].as_str(), pi["quartic"].as_str()), (Some("-1"), Some("9/8"), Some("9/8")));
    assert_eq!(find(2, 1, "pauli", "signed")["yang_mills"], "-1");
    let csv = cliffverify(&["coefficients", "--n-max", "6"], None);
    assert_eq!(code(&csv), 0);
    assert_eq!(String::from_utf8_lossy(&csv.stdout).lines().count(), 1 + 3 * 2 * 4);
    assert_eq!(code(&cliffverify(&["coefficients", "--n-max", "1"], None)), 2);
}

#[test]
fn lambda_command_reports_both_routes() {
    let file = configs().join("masses.json");
    let o = cliffverify(&["lambda", file.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(t["a"], "27/8");
    let f = |k: &str| t[k].as_f64().unwrap();
    assert!((f("lambda") + 0.5739).abs() < 1e-12);
    assert!((f("block_trace") - 1.8183).abs() < 1e-12);
    assert!((f("block_trace") - f("lambda") - f("anticommutator_term")).abs() < 1e-12);
    assert_eq!(code(&cliffverify(&["lambda", file.to_str().unwrap(), "--n", "3"], None)), 2);
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("wall_time_s");
            m.remove("environment");
            m.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cheap.json", CHEAP);
    let mut reports = Vec::new();
    for t in ["1", "2"] {
        let out = dir.path().join(format!("t{t}"));
        let o = cliffverify(&["run", &cfg, "--out", out.to_str().unwrap()], Some(t));
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(out.join("cheap.report.json")).unwrap()).unwrap();
        assert_eq!(v["environment"]["threads"].as_u64(), Some(t.parse().unwrap()));
        strip_timing(&mut v);
        reports.push(v);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn mass_files_resolve_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.json", r#"{ "m_d": [[0.5]], "m_m": [[0.25]] }"#);
    let cfg = write(
        dir.path(),
        "withmass.json",
        r#"{ "signature": { "p": 3, "q": 1 }, "epsilon": 1, "seed": 1, "checks": ["lambda_law"], "masses": { "file": "m.json" }, "samples": 1 }"#,
    );
    let out = dir.path().to_string_lossy().into_owned();
    let o = cliffverify(&["run", &cfg, "--out", &out], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let wrong = write(
        dir.path(),
        "wrongsize.json",
        r#"{ "signature": { "p": 3, "q": 1 }, "epsilon": 1, "seed": 1, "checks": [], "twist": { "v_r": 2 }, "masses": { "file": "m.json" } }"#,
    );
    assert_eq!(code(&cliffverify(&["run", &wrong, "--out", &out], None)), 2);
}

#[test]
fn list_checks_names_every_id() {
    let o = cliffverify(&["list-checks"], None);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for id in ["clifford", "pauli", "stm_identity", "pi_identity", "lambda_routes", "lambda_law", "ymh"] {
        assert!(text.lines().any(|l| l.starts_with(id)), "missing {id}");
    }
    assert!(text.lines().find(|l| l.starts_with("lambda_routes")).unwrap().contains("known deviation"));
}
