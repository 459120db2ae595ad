//! Grid scan of `max_k |(log L)^{(k)}(σ0 + it) - c_k|` over a `t` range.

use std::time::Instant;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::check_sigma0;
use crate::error::{Error, Result};
use crate::eval::{log_l_derivatives, EvalConfig};
use crate::lfunc::LFunctionDescriptor;

/// Largest `t` a scan may reach.
pub const T_CAP: f64 = 1e4;

/// Grid points handed to a worker at a time.
pub const WINDOW: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TRange {
    pub t_min: f64,
    pub t_max: f64,
    pub step: f64,
}

impl TRange {
    /// Parses `t0:t1:step`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!("t range `{text}` is not t0:t1:step")));
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad number `{p}` in t range")))
            })
            .collect::<Result<_>>()?;
        Ok(TRange {
            t_min: v[0],
            t_max: v[1],
            step: v[2],
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min.is_finite() && self.t_max.is_finite() && self.step.is_finite()) {
            return Err(Error::invalid("t range must be finite"));
        }
        if self.t_min >= self.t_max {
            return Err(Error::range(format!(
                "empty t range: t_min = {} is not below t_max = {}",
                self.t_min, self.t_max
            )));
        }
        if self.t_min <= 0.0 {
            return Err(Error::range(format!("t_min = {} must be positive", self.t_min)));
        }
        if self.t_max > T_CAP {
            return Err(Error::range(format!("t_max = {} exceeds the cap {T_CAP}", self.t_max)));
        }
        if !(self.step > 0.0) {
            return Err(Error::range(format!("step = {} must be positive", self.step)));
        }
        Ok(())
    }

    /// Number of grid points, endpoints included.
    pub fn points(&self) -> usize {
        ((self.t_max - self.t_min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn point(&self, i: usize) -> f64 {
        self.t_min + i as f64 * self.step
    }
}

#[derive(Debug, Clone)]
pub struct ScanRequest {
    pub sigma0: f64,
    pub targets: Vec<C64>,
    pub eps: f64,
    pub range: TRange,
    pub workers: usize,
    pub eval: EvalConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowMinimum {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// `None` when every point of the window failed to evaluate.
    pub best_t: Option<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub descriptor: String,
    pub sigma0: f64,
    pub n: usize,
    pub targets: Vec<C64>,
    pub eps: f64,
    pub t_range: TRange,
    pub grid_points: usize,
    pub best_t: f64,
    pub best_residuals: Vec<f64>,
    pub best_max_residual: f64,
    /// Whether golden-section refinement improved on the best grid point.
    pub refined: bool,
    pub success: bool,
    pub windows: Vec<WindowMinimum>,
    #[serde(skip)]
    pub wall_time: f64,
}

impl ScanReport {
    /// Per-window minima as CSV.
    pub fn to_csv(&self) -> String {
        use super::report::csv_float;
        let mut out = String::from("t");
        for k in 0..self.n {
            out.push_str(&format!(",residual_{k}"));
        }
        out.push_str(",max_residual\n");
        for w in &self.windows {
            let Some(t) = w.best_t else { continue };
            out.push_str(&csv_float(t));
            for r in &w.residuals {
                out.push(',');
                out.push_str(&csv_float(*r));
            }
            out.push(',');
            out.push_str(&csv_float(w.max_residual));
            out.push('\n');
        }
        out
    }
}

/// Residual vector `|(log L)^{(k)}(σ0 + it) - c_k|` for `k < N`.
pub fn residuals_at(desc: &LFunctionDescriptor, sigma0: f64, c: &[C64], t: f64, cfg: &EvalConfig) -> Result<Vec<f64>> {
    let d = log_l_derivatives(desc, C64::new(sigma0, t), c.len(), cfg)?;
    Ok(d.iter().zip(c).map(|(a, b)| (a - b).norm()).collect())
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn scan_window(desc: &LFunctionDescriptor, req: &ScanRequest, index: usize, total: usize) -> WindowMinimum {
    let start = index * WINDOW;
    let end = (start + WINDOW).min(total);
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    let mut errors = Vec::new();
    for i in start..end {
        let t = req.range.point(i);
        match residuals_at(desc, req.sigma0, &req.targets, t, &req.eval) {
            Ok(r) => {
                let m = max_of(&r);
                if best.as_ref().map_or(true, |b| m < b.2) {
                    best = Some((t, r, m));
                }
            }
            Err(e) => errors.push(format!("t = {t}: {e}")),
        }
    }
    let (best_t, residuals, max_residual) = match best {
        Some((t, r, m)) => (Some(t), r, m),
        None => (None, Vec::new(), f64::INFINITY),
    };
    WindowMinimum {
        index,
        t_start: req.range.point(start),
        t_end: req.range.point(end - 1),
        best_t,
        residuals,
        max_residual,
        errors,
    }
}

/// Golden-section search for the smallest max-residual on `[lo, hi]`.
fn refine(desc: &LFunctionDescriptor, req: &ScanRequest, mut lo: f64, mut hi: f64) -> Option<(f64, Vec<f64>, f64)> {
    let score = |t: f64| {
        residuals_at(desc, req.sigma0, &req.targets, t, &req.eval)
            .ok()
            .map(|r| (max_of(&r), r))
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let mut fa = score(a)?.0;
    let mut fb = score(b)?.0;
    for _ in 0..80 {
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = score(a)?.0;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = score(b)?.0;
        }
    }
    let t = if fa <= fb { a } else { b };
    let (m, r) = score(t)?;
    Some((t, r, m))
}

pub fn run_scan(desc: &LFunctionDescriptor, req: &ScanRequest) -> Result<ScanReport> {
    let started = Instant::now();
    check_sigma0(desc, req.sigma0)?;
    req.range.validate()?;
    if req.targets.is_empty() {
        return Err(Error::invalid("empty target vector"));
    }
    if !(req.eps > 0.0) {
        return Err(Error::range(format!("ε = {} must be positive", req.eps)));
    }
    let total = req.range.points();
    let n_windows = total.div_ceil(WINDOW);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(req.workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let windows: Vec<WindowMinimum> = pool.install(|| {
        (0..n_windows)
            .into_par_iter()
            .map(|w| scan_window(desc, req, w, total))
            .collect()
    });

    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for w in &windows {
        if let Some(t) = w.best_t {
            if best.as_ref().map_or(true, |b| w.max_residual < b.2) {
                best = Some((t, w.residuals.clone(), w.max_residual));
            }
        }
    }
    let Some((mut best_t, mut best_res, mut best_max)) = best else {
        return Err(Error::Precision("no grid point could be evaluated".into()));
    };
    let lo = (best_t - req.range.step).max(req.range.t_min);
    let hi = (best_t + req.range.step).min(req.range.t_max);
    let mut refined = false;
    if let Some((t, r, m)) = refine(desc, req, lo, hi) {
        if m < best_max {
            best_t = t;
            best_res = r;
            best_max = m;
            refined = true;
        }
    }
    Ok(ScanReport {
        descriptor: desc.name.clone(),
        sigma0: req.sigma0,
        n: req.targets.len(),
        targets: req.targets.clone(),
        eps: req.eps,
        t_range: req.range,
        grid_points: total,
        best_t,
        best_residuals: best_res,
        best_max_residual: best_max,
        refined,
        success: best_max < req.eps,
        windows,
        wall_time: started.elapsed().as_secs_f64(),
    })
}
