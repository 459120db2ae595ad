use std::process::{Command, Output};

use num_complex::Complex64 as C64;
use serde_json::Value;

use effuniv::cli::{cmd_disc, cmd_scan, scan_json, DiscRequest, DiscSampling, ScanRequest, TRange};
use effuniv::eval::{log_l_derivatives, EvalConfig};
use effuniv::lfunc::builtin_zeta;
use effuniv::phases::greedy_product_values;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_effuniv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn literal(z: C64) -> String {
    format!("{:?}{:+?}i", z.re, z.im)
}

fn practical_params(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("params.json");
    std::fs::write(&path, r#"{"mode": "practical", "X": 50, "Y": 200, "H": 200, "Q": 2000}"#).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn constants_report() {
    let out = run(&["constants", "--sigma0", "0.75"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("\"d\": 64.0"));
    let v = stdout_json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["constants"]["a"], 0.8125);
    let log_log_t = v["threshold"]["log_log_t"].as_f64().unwrap();
    assert!((log_log_t / 2f64.powi(64) - 1.0).abs() < 1e-14);
    let again = run(&["constants", "--sigma0", "0.75"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn constants_with_targets() {
    let out = run(&["constants", "--target", "1,1", "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["b_quantity"], 40.0);
}

#[test]
fn sigma0_out_of_range_exits_two() {
    let out = run(&["constants", "--sigma0", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("σ0 > σ_L"), "{err}");
}

#[test]
fn bad_inputs_exit_two() {
    assert_eq!(run(&["constants", "--target", "1+"]).status.code(), Some(2));
    assert_eq!(run(&["constants", "--descriptor", "dirichlet:4:0,1,0"]).status.code(), Some(2));
    assert_eq!(run(&["construct", "--target", "0.1"]).status.code(), Some(2));
    assert_eq!(
        run(&["construct", "--target", "0.1", "--params", "/nonexistent/params.json"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn construct_self_target_passes() {
    let dir = tempfile::tempdir().unwrap();
    let params = practical_params(&dir);
    let c = greedy_product_values(&builtin_zeta(), 2000.0, 0.75, 2).unwrap();
    let target = format!("{},{}", literal(c[0]), literal(c[1]));
    let phases = dir.path().join("phases.json");
    let report = dir.path().join("report.json");
    let out = run(&[
        "construct",
        "--target",
        &target,
        "--params",
        &params,
        "--phases-out",
        phases.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-9);
    assert!(v["recomputation_gap"].as_f64().unwrap() <= 1e-12);
    assert_eq!(v["blocks"].as_array().unwrap().len(), 2);
    let theta = effuniv::PhaseAssignment::from_json(&std::fs::read_to_string(&phases).unwrap()).unwrap();
    assert_eq!(theta.len(), v["theta_star"].as_array().unwrap().len());
}

#[test]
fn construct_reports_the_failed_step() {
    let dir = tempfile::tempdir().unwrap();
    let params = practical_params(&dir);
    let out = run(&["construct", "--target", "1e6,0", "--params", &params]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("block solvability"));
    assert!(out.stdout.is_empty());
}

#[test]
fn scan_rejects_empty_ranges() {
    let out = run(&["scan", "--target", "0,0", "--trange", "45:30:0.01"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["scan", "--target", "0,0", "--trange", "30:45:0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("minima.csv");
    let out = run(&[
        "scan",
        "--sigma0",
        "0.8",
        "--target",
        "0.5,-0.2+0.1i",
        "--eps",
        "0.5",
        "--trange",
        "20:22:0.01",
        "--workers",
        "2",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wall_time"));
    let v = stdout_json(&out);
    assert_eq!(v["schema"], 1);
    assert!(v.get("wall_time").is_none());
    assert_eq!(v["grid_points"], 201);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,residual_0,residual_1,max_residual"));
    assert_eq!(lines.count(), v["windows"].as_array().unwrap().len());
}

#[test]
fn scan_is_independent_of_workers() {
    let z = builtin_zeta();
    let cfg = EvalConfig::default();
    let targets = log_l_derivatives(&z, C64::new(0.8, 14.2), 2, &cfg).unwrap();
    let mut req = ScanRequest {
        sigma0: 0.8,
        targets,
        eps: 1e-3,
        range: TRange {
            t_min: 10.0,
            t_max: 16.0,
            step: 0.01,
        },
        workers: 1,
        eval: cfg,
    };
    let one = cmd_scan(&z, &req).unwrap();
    req.workers = 2;
    let two = cmd_scan(&z, &req).unwrap();
    req.workers = 4;
    let four = cmd_scan(&z, &req).unwrap();
    assert_eq!(scan_json(&one), scan_json(&two));
    assert_eq!(scan_json(&one), scan_json(&four));
    assert_eq!(one.to_csv(), four.to_csv());
    assert!(one.success);
    assert!((one.best_t - 14.2).abs() < 1e-2);
}

fn disc_request(taylor: Vec<C64>, range: TRange) -> DiscRequest {
    DiscRequest {
        sigma0: 0.8,
        t0: 0.0,
        radius: 0.05,
        taylor,
        eps: 0.5,
        delta0: 0.5,
        range,
        workers: 1,
        sampling: DiscSampling {
            boundary: 180,
            interior: 200,
        },
        eval: EvalConfig::default(),
    }
}

#[test]
fn disc_constant_target() {
    let range = TRange {
        t_min: 20.0,
        t_max: 30.0,
        step: 0.05,
    };
    let r = cmd_disc(&builtin_zeta(), &disc_request(vec![C64::new(2.0, 0.0)], range)).unwrap();
    assert_eq!(r.sigma_1, 0.0);
    assert!(r.n >= 1);
    assert_eq!(r.m_g, 2.0);
    assert!(r.budget_holds);
    assert!(r.sup_deviation <= r.sigma_1 + r.sigma_2 + r.sigma_3);
    assert!(r.delta > 0.0 && r.delta <= 0.5);
}

#[test]
fn disc_rejects_vanishing_centre() {
    let out = run(&["disc", "--taylor", "0,1", "--trange", "20:30:0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("g(s0) = 0"));
    let out = run(&["disc", "--taylor", "1", "--radius", "0.4", "--trange", "20:30:0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn disc_from_the_command_line() {
    let out = run(&[
        "disc",
        "--taylor",
        "2",
        "--trange",
        "20:21:0.1",
        "--boundary-samples",
        "90",
        "--interior-samples",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["sigma_1"], 0.0);
    assert_eq!(v["budget_holds"], true);
}

#[test]
fn mollifier_check_passes() {
    let out = run(&["mollifier-check", "--samples", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["alpha0_ok"], true);
    assert_eq!(v["within_bound"], true);
    assert_eq!(v["bounds"]["prime_count"], 2);
}
