//! Evaluation of ζ and Dirichlet L-functions with derivatives, and the
//! horizontally continued branch of `log L`.
//!
//! Everything is computed as a Taylor jet in `h` around the evaluation point,
//! so the Euler–Maclaurin expression is differentiated term by term.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lfunc::LFunctionDescriptor;
use crate::phases::PhaseAssignment;
use crate::powseries::TruncatedSeries;
use crate::sieve;

/// `B_{2j}/(2j)!` for `j = 1..=13`.
const BERNOULLI_OVER_FACT: [f64; 13] = {
    const B: [(f64, f64); 13] = [
        (1.0, 6.0),
        (-1.0, 30.0),
        (1.0, 42.0),
        (-1.0, 30.0),
        (5.0, 66.0),
        (-691.0, 2730.0),
        (7.0, 6.0),
        (-3617.0, 510.0),
        (43867.0, 798.0),
        (-174611.0, 330.0),
        (854513.0, 138.0),
        (-236364091.0, 2730.0),
        (8553103.0, 6.0),
    ];
    let mut out = [0.0; 13];
    let mut fact = 1.0;
    let mut j = 0;
    while j < 13 {
        let k = 2.0 * (j as f64 + 1.0);
        fact *= (k - 1.0) * k;
        out[j] = B[j].0 / B[j].1 / fact;
        j += 1;
    }
    out
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub abs_tol: f64,
    /// Number of Bernoulli correction terms, at most 12.
    pub euler_maclaurin_terms: usize,
    /// Forces the main-sum length; otherwise `max(20, 2|t|)`, doubled as needed.
    pub cutoff: Option<usize>,
    /// Abscissa where the branch of `log L` is seeded.
    pub anchor_sigma: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            abs_tol: 1e-10,
            euler_maclaurin_terms: 12,
            cutoff: None,
            anchor_sigma: 10.0,
        }
    }
}

const MAX_CUTOFF: usize = 1 << 20;

/// Hurwitz `ζ(s0 + h, a)` as a jet in `h`, with main-sum length `m`.
/// Returns the jet and a per-coefficient estimate of the truncation error.
fn hurwitz_jet(s0: C64, a: f64, order: usize, m: usize, terms: usize) -> (Vec<C64>, f64) {
    let n = order;
    let mut acc = vec![C64::new(0.0, 0.0); n + 1];
    let mut inv_fact = vec![1.0; n + 1];
    for k in 1..=n {
        inv_fact[k] = inv_fact[k - 1] / k as f64;
    }
    for i in 0..m {
        let x = i as f64 + a;
        let lx = x.ln();
        let base = (-s0 * lx).exp();
        let mut pow = 1.0;
        for k in 0..=n {
            acc[k] += base * (pow * inv_fact[k]);
            pow *= -lx;
        }
    }
    let w = m as f64 + a;
    let lw = w.ln();
    // w^{-s} as a jet.
    let base = (-s0 * lw).exp();
    let mut wpow = Vec::with_capacity(n + 1);
    let mut pow = 1.0;
    for k in 0..=n {
        wpow.push(base * (pow * inv_fact[k]));
        pow *= -lw;
    }
    let w_s = TruncatedSeries::new(wpow);
    // 1/(s - 1) = Σ (-1)^k h^k / (s0 - 1)^{k+1}.
    let r = (s0 - 1.0).inv();
    let mut inv = Vec::with_capacity(n + 1);
    let mut rk = r;
    for k in 0..=n {
        inv.push(if k % 2 == 0 { rk } else { -rk });
        rk *= r;
    }
    let pole = w_s.mul(&TruncatedSeries::new(inv)).scale(C64::new(w, 0.0));
    let mut total = TruncatedSeries::new(acc).add(&pole).add(&w_s.scale(C64::new(0.5, 0.0)));

    let mut poch = TruncatedSeries::linear(s0, n);
    let mut err = 0.0;
    for j in 1..=terms + 1 {
        let term = poch
            .mul(&w_s)
            .scale(C64::new(BERNOULLI_OVER_FACT[j - 1] * w.powi(1 - 2 * j as i32), 0.0));
        if j <= terms {
            total = total.add(&term);
            let shift = 2.0 * j as f64;
            poch = poch
                .mul(&TruncatedSeries::linear(s0 + (shift - 1.0), n))
                .mul(&TruncatedSeries::linear(s0 + shift, n));
        } else {
            let k = 2.0 * terms as f64 + 1.0;
            let safety = ((s0 + k).norm() / (s0.re + k)).max(1.0);
            let mut fact = 1.0;
            for (i, c) in term.coeffs().iter().enumerate() {
                if i > 0 {
                    fact *= i as f64;
                }
                err = f64::max(err, c.norm() * fact * safety);
            }
        }
    }
    (total.into_coeffs(), err)
}

fn check_point(desc: &LFunctionDescriptor, s: C64) -> Result<()> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::invalid("evaluation point is not finite"));
    }
    if s == C64::new(1.0, 0.0) {
        return Err(if desc.pole_order > 0 {
            Error::Pole("1".into())
        } else {
            Error::invalid("s = 1 is not supported by the Hurwitz decomposition")
        });
    }
    if s.re <= 0.0 {
        return Err(Error::range(format!("Re(s) = {} must be positive", s.re)));
    }
    Ok(())
}

/// Taylor coefficients `L^{(k)}(s)/k!` for `k = 0..=order`.
pub fn l_jet(desc: &LFunctionDescriptor, s: C64, order: usize, cfg: &EvalConfig) -> Result<TruncatedSeries> {
    check_point(desc, s)?;
    let (q, table) = desc
        .character()
        .ok_or_else(|| Error::invalid(format!("descriptor '{}' has no evaluator", desc.name)))?;
    let terms = cfg.euler_maclaurin_terms.clamp(1, 12);
    let mut m = cfg
        .cutoff
        .unwrap_or_else(|| 20usize.max((2.0 * s.im.abs()).ceil() as usize));
    loop {
        let mut total = TruncatedSeries::zero(order);
        let mut err = 0.0;
        for (a, chi) in table.iter().enumerate() {
            if chi.norm() == 0.0 {
                continue;
            }
            let res = if a == 0 { q as f64 } else { a as f64 };
            let (jet, e) = hurwitz_jet(s, res / q as f64, order, m, terms);
            total = total.add(&TruncatedSeries::new(jet).scale(*chi));
            err += e;
        }
        if q > 1 {
            let lq = (q as f64).ln();
            let base = (-s * lq).exp();
            let mut coeffs = Vec::with_capacity(order + 1);
            let mut pow = 1.0;
            let mut fact = 1.0;
            for k in 0..=order {
                if k > 0 {
                    fact *= k as f64;
                }
                coeffs.push(base * (pow / fact));
                pow *= -lq;
            }
            total = total.mul(&TruncatedSeries::new(coeffs));
            err *= base.norm() * (1.0 + lq).powi(order as i32);
        }
        if err <= 0.5 * cfg.abs_tol || cfg.cutoff.is_some() {
            if err > cfg.abs_tol {
                return Err(Error::Precision(format!(
                    "error estimate {err:e} exceeds tolerance {:e} at s = {s}",
                    cfg.abs_tol
                )));
            }
            return Ok(total);
        }
        if m >= MAX_CUTOFF {
            return Err(Error::Precision(format!(
                "error estimate {err:e} above tolerance with main sum length {m}"
            )));
        }
        m *= 2;
    }
}

/// `d^order/ds^order L(s)`.
pub fn eval_l(desc: &LFunctionDescriptor, s: C64, order: usize, cfg: &EvalConfig) -> Result<C64> {
    let jet = l_jet(desc, s, order, cfg)?;
    let fact: f64 = (1..=order).map(|i| i as f64).product();
    Ok(jet.coeff(order) * fact)
}

/// Trace of the horizontal continuation used for `log L`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogBranchPath {
    pub anchor_sigma: f64,
    pub steps: usize,
    /// Smallest `|L|` met along the path.
    pub min_abs: f64,
}

/// Smallest `|L|` tolerated on the path before the branch is declared ambiguous.
pub const ZERO_PROXIMITY: f64 = 1e-8;

/// `Σ b(n) n^{-s}` over prime powers `n <= limit`; accurate for large `Re s`.
fn log_dirichlet_series(desc: &LFunctionDescriptor, s: C64, limit: u64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &p in sieve::shared().up_to(limit as f64) {
        let mut pl = p;
        let mut l = 1;
        while pl <= limit {
            acc += desc.euler_log_coeff(p, l) * (-s * (pl as f64).ln()).exp();
            l += 1;
            pl = match pl.checked_mul(p) {
                Some(v) => v,
                None => break,
            };
        }
    }
    acc
}

/// `log L(s)` on the branch obtained by continuing horizontally from
/// `Re s = anchor`, where the Dirichlet series of `log L` is summed directly.
///
/// The path is walked in steps short enough that successive values of `L`
/// differ by a small rotation, so each increment is a principal logarithm.
pub fn log_l_traced(desc: &LFunctionDescriptor, s: C64, cfg: &EvalConfig) -> Result<(C64, LogBranchPath)> {
    check_point(desc, s)?;
    if s.im == 0.0 && s.re <= 1.0 {
        return Err(Error::range(format!(
            "log L is undefined on the real segment at σ = {} (t = 0, σ <= 1)",
            s.re
        )));
    }
    let anchor = cfg.anchor_sigma.max(s.re);
    let start = C64::new(anchor, s.im);
    let mut log_val = log_dirichlet_series(desc, start, 2000);
    let mut trace = LogBranchPath {
        anchor_sigma: anchor,
        steps: 0,
        min_abs: f64::INFINITY,
    };
    if anchor == s.re {
        let l = l_jet(desc, s, 0, cfg)?.coeff(0);
        trace.min_abs = l.norm();
        return Ok((log_val, trace));
    }
    let mut sigma = anchor;
    let mut jet = l_jet(desc, start, 1, cfg)?;
    let mut prev = jet.coeff(0);
    trace.min_abs = prev.norm();
    while sigma > s.re {
        let dlog = (jet.coeff(1) / prev).norm();
        let mut h = (0.25 / dlog.max(1e-12)).min(0.5).min(sigma - s.re);
        loop {
            let next_sigma = if h >= sigma - s.re { s.re } else { sigma - h };
            let next_jet = l_jet(desc, C64::new(next_sigma, s.im), 1, cfg)?;
            let next = next_jet.coeff(0);
            if next.norm() < ZERO_PROXIMITY {
                return Err(Error::BranchAmbiguity(format!(
                    "|L| = {:e} at σ = {next_sigma}, t = {} on the continuation path",
                    next.norm(),
                    s.im
                )));
            }
            let ratio = next / prev;
            if ratio.arg().abs() < 0.5 || h < 1e-9 {
                if ratio.arg().abs() >= 0.5 {
                    return Err(Error::BranchAmbiguity(format!(
                        "argument jumps by {} near σ = {next_sigma}",
                        ratio.arg()
                    )));
                }
                log_val += ratio.ln();
                trace.min_abs = trace.min_abs.min(next.norm());
                trace.steps += 1;
                sigma = next_sigma;
                prev = next;
                jet = next_jet;
                break;
            }
            h *= 0.5;
        }
    }
    // The real part is pinned to ln|L| exactly; only the argument is tracked.
    Ok((C64::new(prev.norm().ln(), log_val.im), trace))
}

/// `d^order/ds^order log L(s)` on the horizontal branch.
pub fn eval_log_l(desc: &LFunctionDescriptor, s: C64, order: usize, cfg: &EvalConfig) -> Result<C64> {
    if order == 0 {
        return Ok(log_l_traced(desc, s, cfg)?.0);
    }
    Ok(log_l_derivatives(desc, s, order + 1, cfg)?[order])
}

/// `(log L)^{(k)}(s)` for `k < n`.
pub fn log_l_derivatives(desc: &LFunctionDescriptor, s: C64, n: usize, cfg: &EvalConfig) -> Result<Vec<C64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let (log0, _) = log_l_traced(desc, s, cfg)?;
    let mut out = vec![log0];
    if n > 1 {
        let jet = l_jet(desc, s, n - 1, cfg)?;
        let tail = jet.log_tail()?;
        let mut fact = 1.0;
        for k in 1..n {
            fact *= k as f64;
            out.push(tail.coeff(k) * fact);
        }
    }
    Ok(out)
}

/// Tolerance on the discarded `l`-tail of each Euler factor.
pub const EULER_TAIL_TOL: f64 = 1e-12;

/// Number of prime-power terms `l = 1..=L` needed so that the tail of
/// `Σ_l C p^{lϑ} (l log p)^k p^{-lσ}` is below `tol`, and the bound on it.
pub fn euler_l_cutoff(desc: &LFunctionDescriptor, p: u64, sigma0: f64, k: usize, tol: f64) -> (u32, f64) {
    let lp = (p as f64).ln();
    let r = (p as f64).powf(desc.growth_theta - sigma0);
    let mut l = 1u32;
    loop {
        let next = (l + 1) as f64;
        let q = ((next + 1.0) / next).powi(k as i32) * r;
        if q < 1.0 {
            let t_next = desc.growth_c * (next * lp).powi(k as i32) * r.powf(next);
            let tail = t_next / (1.0 - q);
            if tail <= tol {
                return (l, tail);
            }
        }
        l += 1;
        if l > 10_000 {
            return (l, f64::INFINITY);
        }
    }
}

/// `∂^k/∂s^k log L_M(σ0, θ)` for `k = 0..n`, summing `b(p^l) e^{-2πilθ_p}
/// (-l log p)^k p^{-lσ0}` over `p` in `primes`. Primes missing from `theta`
/// carry phase 0.
pub fn finite_log_product_all(
    desc: &LFunctionDescriptor,
    primes: &[u64],
    sigma0: f64,
    theta: &PhaseAssignment,
    n: usize,
) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    let kmax = n.saturating_sub(1);
    for &p in primes {
        let lp = (p as f64).ln();
        let (l_max, _) = euler_l_cutoff(desc, p, sigma0, kmax, EULER_TAIL_TOL);
        let phase = theta.get(p);
        for l in 1..=l_max {
            let b = desc.euler_log_coeff(p, l);
            if b == C64::new(0.0, 0.0) {
                continue;
            }
            let ll = l as f64 * lp;
            let rot = C64::from_polar(1.0, -2.0 * PI * l as f64 * phase);
            let base = b * rot * (-sigma0 * ll).exp();
            let mut pow = 1.0;
            for v in out.iter_mut() {
                *v += base * pow;
                pow *= -ll;
            }
        }
    }
    out
}

pub fn finite_log_product(
    desc: &LFunctionDescriptor,
    primes: &[u64],
    sigma0: f64,
    theta: &PhaseAssignment,
    order: usize,
) -> C64 {
    finite_log_product_all(desc, primes, sigma0, theta, order + 1)[order]
}

/// Explicit bound on how far `∂^k log L_{P(Q)}(σ0, θ)` moves, for any `k < n`,
/// when every phase moves by less than `1/Q`:
/// `max_k (2π/Q) Σ_{p<=Q} Σ_l l (l log p)^k |b(p^l)| p^{-lσ0}` plus the
/// certified `l`-tail.
pub fn perturbation_bound(desc: &LFunctionDescriptor, q: f64, sigma0: f64, n: usize) -> f64 {
    let delta = 1.0 / q;
    let mut sums = vec![0.0; n.max(1)];
    let kmax = sums.len() - 1;
    for &p in sieve::table_for(q as u64).up_to(q) {
        let lp = (p as f64).ln();
        let (l_max, tail) = euler_l_cutoff(desc, p, sigma0, kmax + 1, EULER_TAIL_TOL);
        for l in 1..=l_max {
            let ll = l as f64 * lp;
            let w = l as f64 * desc.euler_log_coeff(p, l).norm() * (-sigma0 * ll).exp();
            let mut pow = 1.0;
            for s in sums.iter_mut() {
                *s += w * pow;
                pow *= ll;
            }
        }
        sums.iter_mut().for_each(|s| *s += tail);
    }
    2.0 * PI * delta * sums.into_iter().fold(0.0, f64::max)
}
