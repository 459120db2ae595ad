//! Search for a shift `τ` with `L(s + iτ)` close to a target `g` on a disc,
//! reporting the Taylor budget that controls the approximation.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::scan::TRange;
use crate::bounds::{admissible_range, gl_n_choice};
use crate::error::{Error, Result};
use crate::eval::{eval_l, l_jet, EvalConfig};
use crate::lfunc::LFunctionDescriptor;

/// Sampling density for suprema over a disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscSampling {
    pub boundary: usize,
    pub interior: usize,
}

impl Default for DiscSampling {
    fn default() -> Self {
        DiscSampling {
            boundary: 720,
            interior: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscRequest {
    pub sigma0: f64,
    pub t0: f64,
    pub radius: f64,
    /// `g^{(k)}(s0)/k!`; `g` is the polynomial they define.
    pub taylor: Vec<C64>,
    pub eps: f64,
    pub delta0: f64,
    /// Range of shifts `τ`.
    pub range: TRange,
    pub workers: usize,
    pub sampling: DiscSampling,
    pub eval: EvalConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscReport {
    pub descriptor: String,
    pub sigma0: f64,
    pub t0: f64,
    pub radius: f64,
    pub eps: f64,
    pub delta0: f64,
    pub tau_range: TRange,
    pub sampling: DiscSampling,
    /// `max_{|s-s0|=r} |g(s)|`.
    pub m_g: f64,
    pub n: usize,
    /// `c_k = g^{(k)}(s0)` for `k < N`.
    pub targets: Vec<C64>,
    pub tau: f64,
    /// Sampled `sup |L(s+iτ) - g(s)|` over `|s - s0| <= δ0 r`.
    pub sup_scan_disc: f64,
    /// `max_{|s-s0|=r} |L(s+iτ)|`.
    pub m_tau_l: f64,
    pub delta: f64,
    /// Sampled `sup |L(s+iτ) - g(s)|` over `|s - s0| <= δ r`.
    pub sup_deviation: f64,
    /// Taylor tail of `g` beyond degree `N - 1`.
    pub sigma_1: f64,
    /// Difference of the two degree `N - 1` Taylor polynomials.
    pub sigma_2: f64,
    /// Taylor tail of `L(· + iτ)` beyond degree `N - 1`.
    pub sigma_3: f64,
    pub budget_holds: bool,
    /// Cauchy estimates `M δ^N / (1 - δ)` for the two tails.
    pub cauchy_g: f64,
    pub cauchy_l: f64,
    pub success: bool,
    pub errors: Vec<String>,
}

/// Radical inverse of `i` in `base`.
fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Offsets from the centre: `boundary` points on the circle of radius
/// `rho`, then `interior` Halton points spread uniformly over the disc.
pub fn disc_offsets(rho: f64, sampling: DiscSampling) -> Vec<C64> {
    let mut out = Vec::with_capacity(sampling.boundary + sampling.interior);
    for j in 0..sampling.boundary {
        out.push(C64::from_polar(rho, 2.0 * PI * j as f64 / sampling.boundary as f64));
    }
    for i in 1..=sampling.interior {
        let u = radical_inverse(i, 2);
        let v = radical_inverse(i, 3);
        out.push(C64::from_polar(rho * u.sqrt(), 2.0 * PI * v));
    }
    out
}

fn horner(coeffs: &[C64], h: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * h + c)
}

fn deviation(desc: &LFunctionDescriptor, req: &DiscRequest, tau: f64, offsets: &[C64], g: &[C64]) -> Result<f64> {
    let s0 = C64::new(req.sigma0, req.t0 + tau);
    let mut worst = 0.0f64;
    for (h, gv) in offsets.iter().zip(g) {
        worst = worst.max((eval_l(desc, s0 + h, 0, &req.eval)? - gv).norm());
    }
    Ok(worst)
}

fn validate(desc: &LFunctionDescriptor, req: &DiscRequest) -> Result<()> {
    let g0 = *req.taylor.first().ok_or_else(|| Error::invalid("empty Taylor vector"))?;
    if g0.norm() == 0.0 {
        return Err(Error::invalid("g(s0) = 0, but g(s0) ≠ 0 is required"));
    }
    if !(req.radius > 0.0) {
        return Err(Error::range(format!("r = {} must be positive", req.radius)));
    }
    let (floor, _) = admissible_range(desc);
    if req.sigma0 - req.radius <= floor {
        return Err(Error::range(format!(
            "disc reaches σ = {}, not above max{{σ_L, 1 - 2E_L}} = {floor}",
            req.sigma0 - req.radius
        )));
    }
    if req.sigma0 + req.radius >= 1.0 {
        return Err(Error::range(format!(
            "disc reaches σ = {}, outside the strip σ < 1",
            req.sigma0 + req.radius
        )));
    }
    if !(req.eps > 0.0) {
        return Err(Error::range(format!("ε = {} must be positive", req.eps)));
    }
    if !(req.delta0 > 0.0 && req.delta0 < 1.0) {
        return Err(Error::range(format!("δ0 = {} must lie in (0, 1)", req.delta0)));
    }
    if req.range.t_min >= req.range.t_max {
        return Err(Error::range("empty τ range"));
    }
    if !(req.range.step > 0.0) {
        return Err(Error::range("τ step must be positive"));
    }
    Ok(())
}

/// Largest `δ <= δ0` with `M δ^N / (1 - δ) < ε/3`.
pub fn admissible_delta(m: f64, n: usize, eps: f64, delta0: f64) -> f64 {
    let f = |d: f64| m * d.powi(n as i32) / (1.0 - d);
    if f(delta0) < eps / 3.0 {
        return delta0;
    }
    let (mut lo, mut hi) = (0.0, delta0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < eps / 3.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn run_disc(desc: &LFunctionDescriptor, req: &DiscRequest) -> Result<DiscReport> {
    validate(desc, req)?;
    let a = &req.taylor;
    let boundary = disc_offsets(req.radius, DiscSampling { boundary: req.sampling.boundary, interior: 0 });
    let m_g = boundary.iter().map(|h| horner(a, *h).norm()).fold(0.0, f64::max);
    let n = gl_n_choice(m_g, req.delta0, req.eps)?;
    let mut fact = 1.0;
    let targets: Vec<C64> = (0..n)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            a.get(k).copied().unwrap_or_default() * fact
        })
        .collect();

    // Scan for τ on the disc of radius δ0 r.
    let offsets = disc_offsets(req.delta0 * req.radius, req.sampling);
    let g_vals: Vec<C64> = offsets.iter().map(|h| horner(a, *h)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(req.workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let grid: Vec<f64> = (0..req.range.points()).map(|i| req.range.point(i)).collect();
    let scores: Vec<std::result::Result<f64, String>> = pool.install(|| {
        grid.par_iter()
            .map(|&tau| deviation(desc, req, tau, &offsets, &g_vals).map_err(|e| format!("τ = {tau}: {e}")))
            .collect()
    });
    let mut errors = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for (tau, s) in grid.iter().zip(scores) {
        match s {
            Ok(v) => {
                if best.map_or(true, |b| v < b.1) {
                    best = Some((*tau, v));
                }
            }
            Err(e) => errors.push(e),
        }
    }
    let (mut tau, mut sup_scan) = best.ok_or_else(|| Error::Precision("no shift could be evaluated".into()))?;

    let score = |t: f64| pool.install(|| deviation(desc, req, t, &offsets, &g_vals)).unwrap_or(f64::INFINITY);
    let (mut lo, mut hi) = ((tau - req.range.step).max(req.range.t_min), (tau + req.range.step).min(req.range.t_max));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..50 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if score(x1) <= score(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let mid = 0.5 * (lo + hi);
    let v = score(mid);
    if v < sup_scan {
        tau = mid;
        sup_scan = v;
    }

    // Budget at the chosen shift.
    let s0 = C64::new(req.sigma0, req.t0 + tau);
    let mut m_tau_l = 0.0f64;
    for h in &boundary {
        m_tau_l = m_tau_l.max(eval_l(desc, s0 + h, 0, &req.eval)?.norm());
    }
    let delta = admissible_delta(m_tau_l, n, req.eps, req.delta0);
    let jet = l_jet(desc, s0, n - 1, &req.eval)?;
    let l_taylor = jet.coeffs().to_vec();
    let g_taylor: Vec<C64> = (0..n).map(|k| a.get(k).copied().unwrap_or_default()).collect();
    let diff: Vec<C64> = l_taylor.iter().zip(&g_taylor).map(|(x, y)| x - y).collect();
    let (mut sup, mut s1, mut s2, mut s3) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for h in disc_offsets(delta * req.radius, req.sampling) {
        let l = eval_l(desc, s0 + h, 0, &req.eval)?;
        let gv = horner(a, h);
        let g_head = horner(&g_taylor, h);
        let l_head = horner(&l_taylor, h);
        sup = sup.max((l - gv).norm());
        s1 = s1.max((gv - g_head).norm());
        s2 = s2.max(horner(&diff, h).norm());
        s3 = s3.max((l - l_head).norm());
    }
    let cauchy = |m: f64| m * delta.powi(n as i32) / (1.0 - delta);
    Ok(DiscReport {
        descriptor: desc.name.clone(),
        sigma0: req.sigma0,
        t0: req.t0,
        radius: req.radius,
        eps: req.eps,
        delta0: req.delta0,
        tau_range: req.range,
        sampling: req.sampling,
        m_g,
        n,
        targets,
        tau,
        sup_scan_disc: sup_scan,
        m_tau_l,
        delta,
        sup_deviation: sup,
        sigma_1: s1,
        sigma_2: s2,
        sigma_3: s3,
        budget_holds: sup <= s1 + s2 + s3,
        cauchy_g: cauchy(m_g),
        cauchy_l: cauchy(m_tau_l),
        success: sup < req.eps,
        errors,
    })
}
