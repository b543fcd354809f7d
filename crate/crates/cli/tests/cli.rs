use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn brownm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brownm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').filter_map(|x| x.parse().ok()).collect())
        .collect()
}

#[test]
fn compute_elliptic_has_constant_density() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = brownm(&["compute", "--preset", "elliptic", "--t", "1", "--grid", "128", "--out", out, "--svg"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["schema"], 1);
    assert!((summary["mass"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let target = 1.0 / (2.0 * std::f64::consts::PI);
    assert!((summary["min_density"].as_f64().unwrap() - target).abs() < 1e-9);
    assert!((summary["max_density"].as_f64().unwrap() - target).abs() < 1e-9);
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(csv.starts_with("a,a0,b_t,w_t,flag\n"));
    assert_eq!(csv.lines().count(), 129);
    let svg = fs::read_to_string(dir.path().join("brown.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("polyline") && svg.contains("t = 1"));
}

#[test]
fn measure_file_piecewise_quadratic_runs() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("quad.json");
    fs::write(&file, r#"{"type":"piecewise_poly","pieces":[{"lo":0,"hi":1,"coeffs":[0,0,3]}]}"#).unwrap();
    let out = dir.path().join("out");
    let res = brownm(&[
        "compute",
        "--measure",
        file.to_str().unwrap(),
        "--t",
        "0.25",
        "--grid",
        "64",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = read_json(&out.join("summary.json"));
    assert!((summary["mass"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let dirac = dir.path().join("dirac.json");
    fs::write(&dirac, r#"{"type":"atomic","atoms":[{"x":0.5,"w":1}]}"#).unwrap();
    for args in [
        vec!["compute", "--measure", dirac.to_str().unwrap(), "--t", "1", "--out", out],
        vec!["compute", "--preset", "elliptic", "--t", "-1", "--out", out],
        vec!["verify", "--preset", "bernoulli:1", "--t", "1"],
        vec!["compute", "--preset", "nosuch", "--t", "1", "--out", out],
    ] {
        let res = brownm(&args);
        assert_eq!(res.status.code(), Some(2), "{args:?}");
        assert!(!res.stderr.is_empty());
    }
}

#[test]
fn simulate_is_byte_identical_for_fixed_seed() {
    let run = |dir: &Path| {
        let res = brownm(&[
            "simulate", "--preset", "bernoulli:0.5", "--t", "0.8", "--n", "60", "--reps", "2", "--seed", "9",
            "--grid", "64", "--out", dir.to_str().unwrap(),
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        fs::read(dir.join("cloud.csv")).unwrap()
    };
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run(d1.path());
    assert_eq!(first, run(d2.path()));
    assert!(first.starts_with(b"re,im,rep\n"));
    let report = read_json(&d1.path().join("report.json"));
    assert_eq!(report["schema"], 1);
    assert_eq!(report["points"], 120);
    for key in ["inside_fraction", "marginal_sup_distance", "pushed_sup_distance", "hermitian_sup_distance"] {
        let v = report[key].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v), "{key}");
    }
}

#[test]
fn pushforward_elliptic_q_line() {
    let dir = tempfile::tempdir().unwrap();
    let res = brownm(&[
        "pushforward", "--preset", "semicircle:1", "--t", "1", "--grid", "64", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for row in csv_rows(&dir.path().join("q_t.csv")) {
        assert!((row[1] - 2.0 * row[0]).abs() < 1e-9);
    }
    let summary = read_json(&dir.path().join("summary.json"));
    assert!(summary["max_discrepancy"].as_f64().unwrap() < 1e-5);
    assert!((summary["mass"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(fs::read_to_string(dir.path().join("law_additive.csv")).unwrap().starts_with("u,f\n"));
    // U_t sends the boundary height v to 2v.
    for row in csv_rows(&dir.path().join("lambda.csv")) {
        assert_eq!(row[4], 2.0 * row[1]);
    }
}

#[test]
fn jn_and_characteristics_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = brownm(&["jn", "--preset", "uniform", "--t", "0.3", "--grid", "50", "--out", out]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(read_json(&dir.path().join("summary.json"))["max_abs_difference"].as_f64().unwrap() < 1e-5);

    let res = brownm(&[
        "characteristics", "--preset", "uniform", "--t", "0.2", "--a", "-0.3", "--b", "0.4", "--eps", "0.5",
        "--grid", "16", "--out", out,
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = csv_rows(&dir.path().join("characteristic.csv"));
    assert_eq!(rows.len(), 17);
    let h0 = rows[0][7];
    assert!(rows.iter().all(|r| (r[7] - h0).abs() <= 1e-14 * (1.0 + h0.abs())));
    assert!(read_json(&dir.path().join("summary.json"))["pde_residual"].as_f64().unwrap().abs() < 1e-4);
}

#[test]
fn verify_passes_on_presets() {
    for (preset, t) in [("elliptic", "1"), ("bernoulli:0.6666666666666666", "1.05"), ("uniform", "0.1")] {
        let res = brownm(&["verify", "--preset", preset, "--t", t, "--grid", "128"]);
        let stdout = String::from_utf8_lossy(&res.stdout);
        assert!(res.status.success(), "{preset}: {stdout}");
        assert!(!stdout.contains("FAIL"));
    }
}
