//! End-to-end tests of the `filiform` binary.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_filiform"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn weyl_gauss_sum_row() {
    let out = run(&["weyl", "--k", "2", "--coeffs", "0.2,0", "--ell", "1", "--n", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# filiform"), "missing provenance header:\n{text}");
    assert!(text.contains("N,re,im,abs,log2_N,log2_abs"));
    let row = text.lines().last().unwrap();
    let abs: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((abs - 5f64.sqrt()).abs() < 1e-9, "|W| = {abs}");
}

#[test]
fn rho_exact_fractions() {
    let out = run(&["rho", "--k", "3"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "2/3,1/3,0");
    let out = run(&["rho", "--k", "2"]);
    assert_eq!(stdout(&out).trim(), "1,0");
}

#[test]
fn cf_golden_ratio() {
    let out = run(&["cf", "--x", "1.6180339887", "--depth", "10"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let quotients = v["quotients"].as_array().unwrap();
    assert!(quotients.iter().all(|q| q.as_i64() == Some(1)), "{quotients:?}");
    assert!(v["nu_hat"].as_f64().is_some());
    assert_eq!(v["provenance"]["schema"], "cf/1");
}

#[test]
fn fit_report_shape() {
    let out = run(&[
        "fit", "--coeffs", "0.41421356,0", "--ell", "1", "--n-min", "8", "--n-max", "14",
        "--regime", "strong",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["k"], 2);
    assert_eq!(v["regime"], "strong");
    assert!(v["fit"]["slope"].as_f64().is_some());
    assert!(v["fit"]["r2"].as_f64().is_some());
    assert_eq!(v["bound"]["power"], 0.5);
    assert!(v["bound"]["verdict"].as_bool().is_some());
}

#[test]
fn fit_multi_seed_deterministic_order() {
    let args = [
        "fit", "--alpha", "0.7071067811865476,0,0", "--ell", "1", "--n-min", "6",
        "--n-max", "12", "--seeds", "11,22,33", "--threads", "3",
    ];
    let a = run(&args);
    assert!(a.status.success());
    let b = run(&args);
    assert_eq!(stdout(&a), stdout(&b), "multi-seed output must be deterministic");
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    assert_eq!(reports[0]["seed"], 11);
    assert_eq!(reports[2]["seed"], 33);
}

#[test]
fn orbit_dump() {
    let out = run(&["orbit", "--alpha", "0.25,0", "--s", "0,0", "--n", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "n,s1,s2");
    assert!(rows[1].starts_with("0,"));
    // after two steps of alpha = (1/4, 0) from the origin: (1/2, 1/4)
    let last: Vec<f64> =
        rows[3].split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    assert!((last[0] - 0.5).abs() < 1e-15 && (last[1] - 0.25).abs() < 1e-15);
}

#[test]
fn lattice_flow_csv_and_summary() {
    let out = run(&[
        "lattice-flow", "--alpha", "1.618033988749895,0", "--rho", "1,0", "--t-max", "4",
        "--t-step", "0.5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("t,inj,log_inj"));
    let first_row = text.lines().find(|l| !l.starts_with('#') && !l.starts_with('t')).unwrap();
    let inj0: f64 = first_row.split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(inj0, 0.5, "Inj(0) = 1/2");
    let out = run(&[
        "lattice-flow", "--alpha", "1.618033988749895,0", "--rho", "1,0", "--t-max", "4",
        "--t-step", "0.5", "--summary",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["delta_hat"].as_f64().is_some());
    assert!(v["min_inj"].as_f64().unwrap() > 0.0);
}

#[test]
fn inj_from_explicit_basis() {
    let out = run(&["inj", "--basis", "2,0;0,0.5"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["systole"], 0.5);
    assert_eq!(v["inj"], 0.25);
}

#[test]
fn dist_norm_grid_and_raw() {
    let out = run(&[
        "dist-norm", "--k", "2", "--lambda", "0,1", "--sigma", "1", "--optimal",
        "--t-grid", "0,2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("t,sigma,norm,rate_fit"));
    let out = run(&["dist-norm", "--raw-poly", "1,0,0", "--sigma", "1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let norm = v["norm"].as_f64().unwrap();
    assert!((norm - std::f64::consts::PI.sqrt()).abs() < 1e-8);
}

#[test]
fn scaling_rate() {
    let out = run(&[
        "scaling", "--k", "2", "--lambda", "0,1", "--sigma", "1", "--t-grid", "0,1,2,3",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rate = v["rate"].as_f64().unwrap();
    assert!((rate - 0.5).abs() < 1e-5, "rate {rate}");
    assert_eq!(v["theoretical_rate"], 0.5);
}

#[test]
fn algebra_tables() {
    let out = run(&["algebra", "--k", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["k"], 3);
    assert_eq!(v["brackets"][0]["out"]["Y2"], 1);
    let out = run(&["algebra", "--k", "3", "--basis", "cover"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["brackets"].as_array().unwrap().len(), 6);
}

#[test]
fn exit_codes() {
    // unknown flag: 1 with usage on stderr
    let out = run(&["weyl", "--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    // invalid parameter: 1
    let out = run(&["weyl", "--coeffs", "0.2,0", "--ell", "0", "--n", "5"]);
    assert_eq!(out.status.code(), Some(1));
    // numerical failure (obstruction): 2
    let out = run(&["green", "--function", "gaussian"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("obstruction"));
    // divergent raw norm: 1 (analytic precondition)
    let out = run(&["dist-norm", "--raw-poly", "1,0,0", "--sigma", "0.2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_merging() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "[weyl]\ncoeffs = [0.2, 0.0]\nell = 1\nn = 5\nmode = \"float64\"\n",
    )
    .unwrap();
    let base = run(&["weyl", "--config", path.to_str().unwrap()]);
    assert!(base.status.success(), "{}", String::from_utf8_lossy(&base.stderr));
    let row = stdout(&base);
    let abs: f64 =
        row.lines().last().unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!((abs - 5f64.sqrt()).abs() < 1e-9);
    // a flag overrides the config value
    let over = run(&["weyl", "--config", path.to_str().unwrap(), "--n", "4"]);
    let row = stdout(&over);
    assert!(row.lines().last().unwrap().starts_with("4,"));
}

#[test]
fn output_file_and_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let args = [
        "weyl", "--coeffs", "0.1234,0.5", "--n-min", "4", "--n-max", "10", "--out",
        path.to_str().unwrap(),
    ];
    let out = run(&args);
    assert!(out.status.success());
    let first = std::fs::read_to_string(&path).unwrap();
    run(&args);
    let second = std::fs::read_to_string(&path).unwrap();
    assert_eq!(first, second, "identical config must give identical bytes");
}
