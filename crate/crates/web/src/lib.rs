//! Browser bindings: effective constants, disk filling and a scan of
//! `log ζ` along a vertical line. The `*_report` functions do the work and
//! return JSON values; the exported wrappers only serialise them.

use num_complex::Complex64 as C64;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use effuniv::bounds::{admissible_range, compute_constants, threshold_t_main};
use effuniv::eval::{eval_log_l, EvalConfig};
use effuniv::lfunc::builtin_zeta;
use effuniv::phases::{phase_sum, realize_phase_sum};

/// Upper limits that keep a single call interactive.
pub const MAX_T: f64 = 1000.0;
pub const MAX_POINTS: usize = 4000;
pub const MAX_RADII: usize = 500;

pub fn constants_report(sigma0: f64, eps: f64) -> Result<Value, String> {
    let zeta = builtin_zeta();
    let k = compute_constants(&zeta, sigma0).map_err(|e| e.to_string())?;
    let log_log_t = threshold_t_main(&k, &[C64::new(0.0, 0.0)], eps, 1.0).map_err(|e| e.to_string())?;
    let (lo, hi) = admissible_range(&zeta);
    Ok(json!({
        "sigma0": sigma0,
        "admissible": [lo, hi],
        "constants": k,
        "violations": k.violations(),
        "log10_log_log_t": log_log_t.log10(),
    }))
}

pub fn disk_fill_report(radii: &[f64], target: C64) -> Result<Value, String> {
    if radii.len() > MAX_RADII {
        return Err(format!("at most {MAX_RADII} radii"));
    }
    let phases = realize_phase_sum(radii, target).map_err(|e| e.to_string())?;
    let mut vertex = C64::new(0.0, 0.0);
    let mut path = vec![[0.0, 0.0]];
    for (r, t) in radii.iter().zip(&phases) {
        vertex += C64::from_polar(*r, -2.0 * std::f64::consts::PI * t);
        path.push([vertex.re, vertex.im]);
    }
    let residual = (phase_sum(radii, &phases) - target).norm();
    Ok(json!({
        "phases": phases,
        "path": path,
        "residual": residual,
        "reach": radii.iter().sum::<f64>(),
    }))
}

/// Samples `log ζ(σ + it)` on an even grid and locates the grid point
/// closest to `target`.
pub fn scan_report(sigma: f64, t_min: f64, t_max: f64, points: usize, target: C64) -> Result<Value, String> {
    if !(sigma > 0.5 && sigma < 1.0) {
        return Err(format!("σ = {sigma} must lie in (1/2, 1)"));
    }
    if !(t_min >= 0.0 && t_max > t_min && t_max <= MAX_T) {
        return Err(format!("need 0 <= t_min < t_max <= {MAX_T}"));
    }
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must lie in [2, {MAX_POINTS}]"));
    }
    let zeta = builtin_zeta();
    let cfg = EvalConfig::default();
    let step = (t_max - t_min) / (points - 1) as f64;
    let mut values = Vec::with_capacity(points);
    let mut best: Option<(f64, f64)> = None;
    for i in 0..points {
        let t = t_min + step * i as f64;
        let v = eval_log_l(&zeta, C64::new(sigma, t), 0, &cfg).map_err(|e| e.to_string())?;
        let d = (v - target).norm();
        if best.map_or(true, |(_, b)| d < b) {
            best = Some((t, d));
        }
        values.push([t, v.re, v.im]);
    }
    let (best_t, best_distance) = best.unwrap();
    Ok(json!({
        "sigma": sigma,
        "values": values,
        "best_t": best_t,
        "best_distance": best_distance,
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn constants(sigma0: f64, eps: f64) -> Result<String, JsValue> {
    to_js(constants_report(sigma0, eps))
}

#[wasm_bindgen]
pub fn disk_fill(radii: &[f64], re: f64, im: f64) -> Result<String, JsValue> {
    to_js(disk_fill_report(radii, C64::new(re, im)))
}

#[wasm_bindgen]
pub fn scan(sigma: f64, t_min: f64, t_max: f64, points: usize, re: f64, im: f64) -> Result<String, JsValue> {
    to_js(scan_report(sigma, t_min, t_max, points, C64::new(re, im)))
}
