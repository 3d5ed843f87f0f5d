use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn gapcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gapcheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(gapcheck(&["--help"]).status.code(), Some(0));
    assert_eq!(gapcheck(&["--version"]).status.code(), Some(0));
    assert_eq!(gapcheck(&["gap", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["nonsense"][..],
        &[],
        &["gap", "--space", "K3"],
        &["gap", "--theorem", "T99"],
        &["gap", "--p", "abc"],
        &["poincare", "--r", "0.5"],
        &["constants", "--n", "2"],
        &["gap", "--theorem", "C12", "--space", "H4", "--p", "0.9"],
        &["gauge", "--lambda", "-1"],
    ] {
        let o = gapcheck(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn gap_csv_layout() {
    let o = gapcheck(&["gap", "--theorem", "C10", "--space", "R4", "--samples", "5", "--seed", "3"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rho,f_plus_norm,threshold,margin"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 4);
        assert!((cells[2] - cells[1] - cells[3]).abs() < 1e-9 * (1.0 + cells[2].abs()));
    }
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn gap_json_summary() {
    let o = gapcheck(&["gap", "--space", "S4", "--theorem", "T5", "--connection", "zero", "--format", "json"]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["columns"][1], "f_plus_norm");
    assert_eq!(doc["summary"]["verdict"], "vanishing_branch");
    assert!(doc["summary"]["witnesses"]["strictness"].is_object());
    assert!(doc["summary"]["witnesses"]["violation"].is_null());
    assert_eq!(doc["summary"]["tolerances"]["equality_rel"], 1e-6);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 50);
}

#[test]
fn gap_violation_witness() {
    let o = gapcheck(&["gap", "--space", "R4", "--theorem", "C10", "--format", "json", "--seed", "5"]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["summary"]["verdict"], "hypothesis_violated");
    assert!(doc["summary"]["witnesses"]["violation"]["margin"].as_f64().unwrap() < 0.0);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# gap run\ntheorem = C10\nspace = R4\nsamples = 4\nformat = json\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();

    let doc: Value = serde_json::from_str(&stdout(&gapcheck(&["gap", "--config", cfg_s]))).unwrap();
    assert_eq!(doc["summary"]["space"], "R4");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 4);

    let o = gapcheck(&["gap", "--config", cfg_s, "--space", "S4", "--theorem", "T5", "--format", "csv"]);
    assert!(stdout(&o).starts_with("rho,"));
    assert_eq!(stdout(&o).lines().count(), 5);

    fs::write(&cfg, "space = R4\ncolour = blue\n").unwrap();
    assert_eq!(gapcheck(&["gap", "--config", cfg_s]).status.code(), Some(1));
    assert_eq!(gapcheck(&["gap", "--config", "/nonexistent/x.cfg"]).status.code(), Some(1));
}

#[test]
fn out_file_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (path, seed) in [(&a, "11"), (&b, "11"), (&c, "12")] {
        let o = gapcheck(&["curvature", "--space", "CP2", "--samples", "6", "--seed", seed, "--out", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    let (ra, rb, rc) = (fs::read(&a).unwrap(), fs::read(&b).unwrap(), fs::read(&c).unwrap());
    assert_eq!(ra, rb);
    assert_ne!(ra, rc);
}

#[test]
fn every_suite_passes_by_default() {
    for sub in ["constants", "forms", "curvature", "poincare", "gauge", "gap", "lemma3", "all"] {
        let o = gapcheck(&[sub, "--samples", "10"]);
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(o.status.code(), Some(0), "{sub}: {err}");
        assert!(err.lines().all(|l| l.starts_with("PASS")), "{sub}: {err}");
    }
}

#[test]
fn zero_connection_gauge_suite() {
    let o = gapcheck(&["gauge", "--connection", "zero", "--samples", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn failing_assertion_exits_two() {
    // The finite-difference step cannot resolve an instanton this small.
    let o = gapcheck(&["gauge", "--lambda", "0.001", "--samples", "5"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn poincare_single_trial() {
    let o = gapcheck(&["poincare", "--space", "R4", "--cutoff", "log", "--r", "10", "--format", "json"]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0]["ratio"].as_f64().unwrap() >= 1.0);
    assert_eq!(doc["summary"]["weight"], "carron");
}
