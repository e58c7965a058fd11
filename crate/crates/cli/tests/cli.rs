use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohframe")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn closure_suite_passes_with_dev_max() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("closure.json");
    let o = run(&["verify", "closure", "--lambda", "2", "--tol", "1e-6", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&out);
    assert_eq!(v["config"]["lambda"], 2.0);
    assert!(v["details"]["closure.lambda"]["dev_max"].as_f64().unwrap() <= 1e-6);
    let results = v["results"].as_array().unwrap();
    assert!(results.iter().all(|r| r["pass"] == true));
    for key in ["name", "value", "expected", "tolerance", "pass"] {
        assert!(results[0].get(key).is_some(), "{key}");
    }
    assert!(results.iter().any(|r| r.get("grid").is_some()));
}

#[test]
fn plane_csv_carries_frame_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plane.csv");
    let o = run(&["verify", "plane", "--n", "33", "--eps", "sqrt2/35", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.iter().filter(|x| &x[0] == "frame").count(), 33);
    assert!(rows.iter().any(|x| &x[0] == "check" && &x[2] == "N=33.unlike_deviation"));
    let first = rows.iter().find(|x| &x[0] == "frame").unwrap();
    let (x, y): (f64, f64) = (first[7].parse().unwrap(), first[8].parse().unwrap());
    assert!((x * x + y * y - 1.0).abs() < 1e-12);
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = run(&["verify", "propagator", "--seed", "5", "--samples", "8192", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn malformed_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"lambda": 2, "tolerance": 1e-6}"#).unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["verify", "closure", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"lambda": 0.5, "seed": 3, "eps": "sqrt2/35"}"#).unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["verify", "spin", "--config", cfg.to_str().unwrap(), "--lambda", "1.5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&out);
    assert_eq!(v["config"]["lambda"], 1.5);
    assert_eq!(v["config"]["seed"], 3);
}

#[test]
fn tolerance_outside_range_is_rejected() {
    for tol in ["1e-13", "0.5"] {
        let o = run(&["verify", "closure", "--tol", tol]);
        assert_eq!(code(&o), 2);
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("r.json");
    let o = run(&["verify", "transforms", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn failing_check_exits_one() {
    // away from the reference gap the raw unlike sum at N = 1e6 is not within 10 eps
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["verify", "plane", "--eps", "0.01", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let v = json(&out);
    assert!(v["results"].as_array().unwrap().iter().any(|r| r["pass"] == false));
}

#[test]
fn timing_is_opt_in() {
    let o = run(&["verify", "transforms"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["timing"].is_null());
    let o = run(&["verify", "transforms", "--timing"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["timing"]["transforms"].as_f64().is_some());
}
