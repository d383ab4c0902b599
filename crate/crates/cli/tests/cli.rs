use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_positronium"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    assert_eq!(code(o), 0, "stderr: {}", stderr(o));
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn scan_writes_full_precision_csv() {
    let o = run(&["scan", "--model", "coulomb", "--n", "2", "--rmin", "50", "--rmax", "2000"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,V"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (r, v) = l.split_once(',').unwrap();
            (r.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 400);
    assert_eq!(rows[0].0, 50.0);
    assert_eq!(rows[399].0, 2000.0);
    assert!(!text.contains('\r'));
}

#[test]
fn scan_is_byte_identical_across_runs() {
    let args = [
        "scan",
        "--model",
        "ring-ml",
        "--n",
        "1",
        "--R-over-alpha2",
        "0.49597832375",
        "--rmin",
        "1e-6",
        "--rmax",
        "1e-4",
        "--points",
        "400",
        "--log",
    ];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn degenerate_grid_is_a_usage_error() {
    let o = run(&["scan", "--model", "coulomb", "--n", "1", "--points", "2", "--rmin", "100", "--rmax", "100"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--rmax"));
}

#[test]
fn usage_errors_name_the_flag() {
    let cases: &[(&[&str], &str)] = &[
        (&["scan", "--model", "coulomb", "--R", "1e-5"], "--R"),
        (&["scan", "--model", "ring-ml", "--R", "-1"], "--R"),
        (&["scan", "--model", "scaling", "--k", "7"], "--k"),
        (&["scan", "--rmin", "1"], "--model"),
        (&["minimize", "--model", "coulomb", "--points-per-decade", "3"], "--points-per-decade"),
        (&["tune", "--model", "coulomb"], "coulomb"),
        (&["tune", "--rmin", "1"], "--rmin"),
        (&["variational", "--R", "-1"], "--R"),
        (&["variational", "--a", "0"], "--a"),
        (&["flux-solve", "--format", "csv"], "CSV"),
    ];
    for (args, needle) in cases {
        let o = run(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains(needle), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(code(&run(&["scan", "--bogus"])), 2);
}

#[test]
fn coulomb_minimum() {
    let v = json(&run(&["minimize", "--model", "coulomb", "--n", "1"]));
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 1);
    assert!((f(&results[0]["r_star"]) - 274.07).abs() < 0.01);
    assert!((f(&results[0]["v_star"]) - 1.999_986_69).abs() < 1e-8);
    assert_eq!(results[0]["kind"], "global_min");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["meta"]["elapsed_seconds"].is_number());
}

#[test]
fn ring_ml_minima_over_full_range() {
    let v = json(&run(&["minimize", "--model", "ring-ml", "--R-over-alpha2", "0.49597832375"]));
    let r = v["results"].as_array().unwrap();
    assert_eq!(r.len(), 2);
    assert_eq!(r[0]["kind"], "global_min");
    assert!(f(&r[0]["r_star"]) < 2e-5);
    assert!((f(&r[1]["r_star"]) - 274.07).abs() < 0.1);
}

#[test]
fn bltp_has_no_n2_state_in_biot_savart_range() {
    let v = json(&run(&["minimize", "--model", "ring-bltp", "--n", "2", "--rmin", "1e-7", "--rmax", "1e-3"]));
    assert!(v["results"].as_array().unwrap().is_empty());
}

#[test]
fn tune_ml_radius() {
    let v = json(&run(&["tune", "--model", "ring-ml", "--target", "0"]));
    let c = f(&v["results"]["tuned"]["coefficient"]);
    assert!(((c - 0.49597832375) / 0.49597832375).abs() < 5e-10);
    assert!(f(&v["results"]["probe"]["dropped_energy"]) < 0.0);
    assert_eq!(v["parameters"]["reference_coefficient"], "0.49597832375");
}

#[test]
fn tune_bltp_pair() {
    let v = json(&run(&["tune", "--model", "ring-bltp", "--target", "0"]));
    let s = &v["results"]["tuned"]["solution"];
    assert!((f(&s["kappa"]) - 1.8e5).abs() < 0.05 * 1.8e5);
    assert!((f(&s["R"]) - 2.57e-5).abs() < 0.05 * 2.57e-5);
}

#[test]
fn flux_solve_branches() {
    let v = json(&run(&["flux-solve", "--kappa", "1.8e5"]));
    let r = f(&v["results"]["solution"]["R"]);
    assert!((r - 2.57e-5).abs() < 0.05 * 2.57e-5);
    assert_eq!(v["results"]["branches"].as_array().unwrap().len(), 2);
    let o = run(&["flux-solve", "--kappa", "1e5"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("kappa"));
}

#[test]
fn variational_modes() {
    let v = json(&run(&["variational", "--R", "2.661639e-5"]));
    let r = v["results"].as_array().unwrap();
    assert_eq!(r.len(), 2);
    assert!((f(&r[0]["a_star"]) - 1.5726e-5).abs() < 0.02 * 1.5726e-5);
    assert!((f(&r[1]["energy"]) - 1.999_986_69).abs() < 1e-7);
    let single = json(&run(&["variational", "--R", "2.661639e-5", "--a", "1.5726e-5"]));
    assert!(f(&single["results"]["energy"]) <= 0.0535);
}

#[test]
fn config_file_with_flag_override() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# scan settings\nmodel = coulomb\nn = 3\nrmin = 10\nrmax = 20\npoints = 5\nspacing = linear").unwrap();
    let path = file.path().to_str().unwrap();
    let v = json(&run(&["scan", "--config", path, "--n", "2", "--format", "json", "--no-timing"]));
    assert_eq!(v["parameters"]["config"]["n"], 2);
    assert_eq!(v["parameters"]["spacing"], "linear");
    assert_eq!(v["results"]["r"].as_array().unwrap().len(), 5);
    assert_eq!(f(&v["results"]["r"][1]), 12.5);

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "model = coulomb\nnot_a_key = 1").unwrap();
    let o = run(&["scan", "--config", bad.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not_a_key"));
}

#[test]
fn no_timing_gives_identical_bytes_and_parameters_round_trip() {
    let args = ["minimize", "--model", "scaling", "--k", "2", "--rmin", "1e-9", "--rmax", "1e-5", "--no-timing"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(v.get("meta").is_none());

    // Re-run from the echoed parameters alone.
    let p = &v["parameters"];
    let radius = f(&p["ring"]["R"]).to_string();
    let k = p["k"].to_string();
    let alpha = f(&p["config"]["alpha"]).to_string();
    let rmin = f(&p["rmin"]).to_string();
    let rmax = f(&p["rmax"]).to_string();
    let again = json(&run(&[
        "minimize", "--model", "scaling", "--k", &k, "--R", &radius, "--alpha", &alpha, "--rmin", &rmin, "--rmax",
        &rmax, "--no-timing",
    ]));
    assert_eq!(again["results"], v["results"]);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let o = run(&["scan", "--model", "coulomb", "--points", "10", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn reproduce_table_and_json() {
    let o = run(&["reproduce"]);
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    for id in 1..=9 {
        assert!(text.lines().any(|l| l.trim_start().starts_with(&format!("{id}  "))), "{text}");
    }
    let v: Value = serde_json::from_slice(&run(&["reproduce", "--json", "--no-timing"]).stdout).unwrap();
    let all_pass = v["results"]["passed"].as_bool().unwrap();
    assert_eq!(code(&o), if all_pass { 0 } else { 1 });
    assert_eq!(v["results"]["criteria"].as_array().unwrap().len(), 9);
}

#[test]
fn tampered_reference_fails_named_criterion() {
    let o = run(&["reproduce", "--reference-coefficient", "0.49597832575"]);
    assert_eq!(code(&o), 1);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l.contains("FAIL") && l.contains("ML ring radius tuning")), "{text}");
}
