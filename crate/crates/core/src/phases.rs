//! Phase vectors: disk filling, the greedy alternating sequence, and the
//! assembly of phases that steer a truncated Euler product onto a target
//! derivative vector.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::bounds::{check_sigma0, compute_constants};
use crate::error::{Error, Result};
use crate::eval::{euler_l_cutoff, finite_log_product_all};
use crate::lfunc::{fit_growth_constant, LFunctionDescriptor};
use crate::powseries::l1;
use crate::sieve::{self, PrimeTable, DEFAULT_SIEVE_LIMIT};
use crate::vandermonde::NodeSystem;

fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(1.0);
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

/// Map from primes to phases in `[0, 1)`, kept sorted by prime.
/// Primes that are not present read as phase 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhaseAssignment {
    entries: Vec<(u64, f64)>,
}

impl PhaseAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, p: u64, theta: f64) {
        let theta = wrap(theta);
        match self.entries.last() {
            Some(&(last, _)) if last < p => self.entries.push((p, theta)),
            None => self.entries.push((p, theta)),
            _ => match self.entries.binary_search_by_key(&p, |e| e.0) {
                Ok(i) => self.entries[i].1 = theta,
                Err(i) => self.entries.insert(i, (p, theta)),
            },
        }
    }

    pub fn get(&self, p: u64) -> f64 {
        self.entries
            .binary_search_by_key(&p, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn contains(&self, p: u64) -> bool {
        self.entries.binary_search_by_key(&p, |e| e.0).is_ok()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_prime(&self) -> Option<u64> {
        self.entries.last().map(|e| e.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.entries.iter().copied()
    }

    /// `[[p, phase], ...]` with phases in shortest round-trip form.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, (p, t)) in self.entries.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\n  [{p}, {t:?}]"));
        }
        out.push_str(if self.entries.is_empty() { "]" } else { "\n]" });
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Vec<(u64, f64)> = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("phase file: {e}")))?;
        let mut out = PhaseAssignment::new();
        for (p, t) in raw {
            if !(0.0..1.0).contains(&t) {
                return Err(Error::invalid(format!("phase {t} for prime {p} is outside [0, 1)")));
            }
            out.set(p, t);
        }
        Ok(out)
    }
}

/// Phases `θ_n` with `Σ r_n e^{-2πiθ_n} = target`.
///
/// The radii are sorted; walking from the largest down, the remaining
/// smaller radii are merged into one virtual radius whose length is picked
/// inside the annulus they can reach, and the current vector is placed by
/// the law of cosines so that the leftover target has exactly that length.
pub fn realize_phase_sum(radii: &[f64], target: C64) -> Result<Vec<f64>> {
    let n = radii.len();
    if n == 0 {
        return Err(Error::invalid("no radii"));
    }
    if radii.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::invalid("radii must be positive and finite"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| radii[i]).collect();
    let mut prefix = vec![0.0; n + 1];
    for k in 0..n {
        prefix[k + 1] = prefix[k] + sorted[k];
    }
    let total = prefix[n];
    let slack = 1e-12 * total;
    let reach = target.norm();
    if reach > total + slack {
        return Err(Error::range(format!(
            "|target| = {reach} exceeds the sum of radii {total}"
        )));
    }
    // Inner radius of the annulus reachable by the k smallest radii.
    let inner = |k: usize| -> f64 {
        if k == 0 {
            0.0
        } else {
            (2.0 * sorted[k - 1] - prefix[k]).max(0.0)
        }
    };
    if n >= 3 && inner(n) > slack {
        return Err(Error::range(format!(
            "largest radius {} exceeds the sum of the others {}",
            sorted[n - 1],
            prefix[n - 1]
        )));
    }
    if reach < inner(n) - slack {
        return Err(Error::range(format!(
            "|target| = {reach} is inside the unreachable disc of radius {}",
            inner(n)
        )));
    }

    let mut phases = vec![0.0; n];
    let mut rest = target;
    for k in (1..n).rev() {
        let r = sorted[k];
        let t = rest.norm();
        let lo = (t - r).abs().max(inner(k));
        let hi = (t + r).min(prefix[k]);
        if lo > hi + slack {
            return Err(Error::Precision(format!(
                "disk filling lost feasibility at radius {r}: [{lo}, {hi}]"
            )));
        }
        let d = 0.5 * (lo + hi.max(lo));
        let v = if t == 0.0 {
            C64::new(-r, 0.0)
        } else {
            let cos = ((t * t + r * r - d * d) / (2.0 * t * r)).clamp(-1.0, 1.0);
            C64::from_polar(r, rest.arg() + cos.acos())
        };
        phases[order[k]] = wrap(-v.arg() / (2.0 * PI));
        rest -= v;
    }
    let v0 = if rest.norm() == 0.0 {
        C64::new(sorted[0], 0.0)
    } else {
        rest
    };
    phases[order[0]] = wrap(-v0.arg() / (2.0 * PI));
    Ok(phases)
}

/// `Σ r_n e^{-2πiθ_n}`.
pub fn phase_sum(radii: &[f64], phases: &[f64]) -> C64 {
    radii
        .iter()
        .zip(phases)
        .map(|(&r, &t)| C64::from_polar(r, -2.0 * PI * t))
        .sum()
}

/// The greedy phases together with the rotated partial sums.
#[derive(Debug, Clone)]
pub struct GreedyPhases {
    pub theta: PhaseAssignment,
    /// `(p, Σ_{q<=p} b(q) e^{-2πiθ_q})` as signed real magnitudes.
    pub partial_sums: Vec<(u64, f64)>,
}

/// Phases that rotate each `b(p)` onto the real axis, with the sign chosen
/// against the running sum, so every partial sum stays within
/// `max_{q<=p} |b(q)|` of zero.
pub fn greedy_theta0_traced(desc: &LFunctionDescriptor, prime_limit: f64) -> Result<GreedyPhases> {
    if !(prime_limit >= 2.0) {
        return Err(Error::invalid(format!("prime limit {prime_limit} must be at least 2")));
    }
    let table = sieve::table_for(prime_limit as u64);
    let primes = table.up_to(prime_limit);
    let mut theta = PhaseAssignment::new();
    let mut partial_sums = Vec::with_capacity(primes.len());
    let mut running = 0.0;
    for &p in primes {
        let b = desc.euler_log_coeff(p, 1);
        if b.norm() == 0.0 {
            theta.set(p, 0.0);
        } else {
            let aligned = b.arg() / (2.0 * PI);
            if running <= 0.0 {
                theta.set(p, aligned);
                running += b.norm();
            } else {
                theta.set(p, aligned + 0.5);
                running -= b.norm();
            }
        }
        partial_sums.push((p, running));
    }
    Ok(GreedyPhases {
        theta,
        partial_sums,
    })
}

pub fn greedy_theta0(desc: &LFunctionDescriptor, prime_limit: f64) -> Result<PhaseAssignment> {
    Ok(greedy_theta0_traced(desc, prime_limit)?.theta)
}

/// Truncated `γ_k` with the certified bound on what was left out.
#[derive(Debug, Clone, Serialize)]
pub struct GammaTargets {
    pub values: Vec<C64>,
    pub truncation: u64,
    pub tail_bounds: Vec<f64>,
}

/// Upper incomplete gamma `Γ(k+1, x)` for integer `k`.
fn upper_gamma_int(k: usize, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=k {
        term *= x / j as f64;
        sum += term;
    }
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    fact * (-x).exp() * sum
}

/// Bounds on `|Σ_{p>P} Σ_l (-l log p)^k b(p^l) e^{-2πilθ_p} p^{-lσ0}|` for
/// `k < n` when `θ` is the greedy sequence.
///
/// The `l = 1` part uses partial summation against partial sums bounded by
/// `max |b(p)|`; the `l >= 2` part is compared with an integral.
pub fn gamma_tail_bounds(desc: &LFunctionDescriptor, p_limit: f64, sigma0: f64, n: usize) -> Result<Vec<f64>> {
    if desc.growth_c == 0.0 {
        return Ok(vec![0.0; n]);
    }
    if desc.growth_theta != 0.0 {
        return Err(Error::invalid(
            "tail bound needs bounded prime coefficients (ϑ = 0)",
        ));
    }
    let c = desc.growth_c;
    let lp = p_limit.ln();
    let alpha = 2.0 * (sigma0 - desc.growth_theta);
    if !(alpha > 1.0) {
        return Err(Error::range("prime-square tail diverges for σ0 <= 1/2"));
    }
    let ratio = p_limit.powf(-(sigma0 - desc.growth_theta));
    (0..n)
        .map(|k| {
            if lp < k as f64 / sigma0 || lp < 2.0 * k as f64 / alpha {
                return Ok(f64::INFINITY);
            }
            let first = 2.0 * c * lp.powi(k as i32) * p_limit.powf(-sigma0);
            // Σ_{m>=0} ((m+2)/2)^k ratio^m, summed until the terms are negligible.
            let mut kfac = 0.0;
            let mut m = 0;
            loop {
                let t = ((m as f64 + 2.0) / 2.0).powi(k as i32) * ratio.powi(m);
                kfac += t;
                if (m as usize > k && t < 1e-18 * kfac) || m > 10_000 {
                    break;
                }
                m += 1;
            }
            let higher = c
                * 2f64.powi(k as i32)
                * kfac
                * upper_gamma_int(k, (alpha - 1.0) * lp)
                / (alpha - 1.0).powi(k as i32 + 1);
            Ok(first + higher)
        })
        .collect()
}

/// `γ_k` summed over primes up to a fixed limit, with its tail bound.
pub fn gamma_at_limit(
    desc: &LFunctionDescriptor,
    theta0: &PhaseAssignment,
    sigma0: f64,
    n: usize,
    p_limit: f64,
) -> Result<GammaTargets> {
    if !(sigma0 > 0.5) {
        return Err(Error::range(format!("σ0 = {sigma0} must exceed 1/2")));
    }
    if n == 0 {
        return Err(Error::invalid("order must be at least 1"));
    }
    let table = sieve::table_for(p_limit as u64);
    let primes = table.up_to(p_limit);
    let values = finite_log_product_all(desc, primes, sigma0, theta0, n);
    // Each Euler factor drops an l-tail of at most 1e-12.
    let dropped = 1e-12 * primes.len() as f64 * f64::from(desc.growth_c > 0.0);
    let tail_bounds = gamma_tail_bounds(desc, p_limit, sigma0, n)?
        .into_iter()
        .map(|t| t + dropped)
        .collect();
    Ok(GammaTargets {
        values,
        truncation: p_limit as u64,
        tail_bounds,
    })
}

/// `γ_k` truncated at the first doubling of the prime limit where the
/// certified tail drops below `tail_eps`.
pub fn gamma_targets(
    desc: &LFunctionDescriptor,
    theta0: &PhaseAssignment,
    sigma0: f64,
    n: usize,
    tail_eps: f64,
) -> Result<GammaTargets> {
    if !(sigma0 > 0.5) {
        return Err(Error::range(format!("σ0 = {sigma0} must exceed 1/2")));
    }
    let coverage = theta0
        .max_prime()
        .map(|p| p as f64)
        .unwrap_or(0.0)
        .min(DEFAULT_SIEVE_LIMIT as f64);
    let mut p_limit: f64 = 1000.0;
    loop {
        let bounds = gamma_tail_bounds(desc, p_limit, sigma0, n)?;
        let dropped = 1e-12 * sieve::shared().pi(p_limit) as f64;
        if bounds.iter().all(|&b| b + dropped <= tail_eps) || desc.growth_c == 0.0 {
            if p_limit > coverage && desc.growth_c != 0.0 {
                return Err(Error::pipeline(
                    "background tail",
                    format!("phases cover primes up to {coverage}, tail needs {p_limit}"),
                ));
            }
            return gamma_at_limit(desc, theta0, sigma0, n, p_limit);
        }
        if p_limit * 2.0 > coverage {
            return Err(Error::pipeline(
                "background tail",
                format!(
                    "certified tail {:e} above {tail_eps:e} at the coverage limit {coverage}",
                    bounds.iter().fold(0.0f64, |a, &b| a.max(b))
                ),
            ));
        }
        p_limit *= 2.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Rigorous,
    Practical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineParams {
    pub sigma0: f64,
    pub n: usize,
    pub eps: f64,
    pub eta: f64,
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub q: f64,
    pub mu: f64,
    pub rho: f64,
    pub mode: Mode,
}

/// User-chosen sizes for practical mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PracticalSizes {
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub q: f64,
}

/// Settings for rigorous mode: the unquantified leading constant of the
/// `X` threshold and the prime limit used to fit `C_{L,η}` and `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigorousSettings {
    pub c1: f64,
    pub fit_limit: f64,
}

impl Default for RigorousSettings {
    fn default() -> Self {
        RigorousSettings {
            c1: 1.0,
            fit_limit: 1e6,
        }
    }
}

pub enum ModeRequest {
    Practical(PracticalSizes),
    Rigorous(RigorousSettings),
}

pub fn derive_pipeline_params(
    desc: &LFunctionDescriptor,
    sigma0: f64,
    n: usize,
    eps: f64,
    c: &[C64],
    mode: ModeRequest,
) -> Result<PipelineParams> {
    check_sigma0(desc, sigma0)?;
    let consts = compute_constants(desc, sigma0)?;
    if n == 0 || c.len() != n {
        return Err(Error::invalid(format!(
            "target has {} entries, order is {n}",
            c.len()
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::range(format!("ε = {eps} must lie in (0, 1)")));
    }
    let base = PipelineParams {
        sigma0,
        n,
        eps,
        eta: consts.eta,
        x: 0.0,
        y: 0.0,
        h: 0.0,
        q: 0.0,
        mu: consts.mu,
        rho: consts.rho,
        mode: Mode::Practical,
    };
    match mode {
        ModeRequest::Practical(s) => {
            if !(s.x > std::f64::consts::E) {
                return Err(Error::range(format!("X = {} must exceed e", s.x)));
            }
            if s.y < 2.0 * s.x + 1.0 {
                return Err(Error::range(format!(
                    "Y = {} violates Y >= 2X + 1 = {}",
                    s.y,
                    2.0 * s.x + 1.0
                )));
            }
            if !(s.h > 0.0 && s.h <= s.y) {
                return Err(Error::range(format!("H = {} must lie in (0, Y]", s.h)));
            }
            let floor = 2f64.powi(n as i32) * s.y;
            if s.q <= floor {
                return Err(Error::range(format!(
                    "Q = {} violates Q > 2^N Y = {floor}",
                    s.q
                )));
            }
            Ok(PipelineParams {
                x: s.x,
                y: s.y,
                h: s.h,
                q: s.q,
                ..base
            })
        }
        ModeRequest::Rigorous(r) => {
            let theta0 = greedy_theta0(desc, r.fit_limit)?;
            let gamma = gamma_at_limit(desc, &theta0, sigma0, n, r.fit_limit)?;
            let diff: Vec<C64> = c.iter().zip(&gamma.values).map(|(a, b)| a - b).collect();
            let x = (r.c1 * (l1(&diff) + 1.0).powf(2.0 / consts.d1_1)).max(3.0);
            let c_eta = fit_growth_constant(desc, consts.eta, r.fit_limit);
            let s_eta = sigma0 - consts.eta;
            let y = (c_eta / consts.mu).powf(1.0 / s_eta) * (2.0 * x).powf(sigma0 / s_eta);
            let y = y.max(2.0 * x + 1.0);
            let h = y.powf(consts.a);
            let q = (2f64.powi(n as i32) * y).floor() + 1.0;
            Ok(PipelineParams {
                x,
                y,
                h,
                q,
                mode: Mode::Rigorous,
                ..base
            })
        }
    }
}

/// One block `M_j` of the construction.
#[derive(Debug, Clone, Serialize)]
pub struct BlockReport {
    pub j: usize,
    pub anchor: u64,
    pub interval: (f64, f64),
    pub primes: usize,
    /// `Σ_{p∈M_j} |b(p)| p^{-σ0}`: radius of the attainable disc.
    pub capacity: f64,
    pub target: C64,
    pub target_abs: f64,
    pub solvable: bool,
    /// Whether the whole vector `z` fits, the stronger reading of the condition.
    pub full_norm_fits: bool,
    /// Largest anchor radius against this block's interval primes.
    pub anchor_covered: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Construction {
    pub params: PipelineParams,
    #[serde(skip)]
    pub theta_star: PhaseAssignment,
    pub anchors: Vec<u64>,
    pub gamma: Vec<C64>,
    pub z: Vec<C64>,
    pub blocks: Vec<BlockReport>,
    /// Anchor radii dominate every interval radius.
    pub anchors_dominate: bool,
    pub achieved: Vec<C64>,
    pub residuals: Vec<f64>,
    pub refinement_rounds: usize,
    pub polish_steps: usize,
}

struct BlockPlan {
    primes: Vec<u64>,
    radii: Vec<f64>,
    aligned: Vec<f64>,
}

/// `∂^k log L_M(σ0, θ)` and its Jacobian with respect to the phases of `M`.
fn block_jacobian(
    desc: &LFunctionDescriptor,
    primes: &[u64],
    sigma0: f64,
    theta: &PhaseAssignment,
    n: usize,
) -> (Vec<C64>, Vec<Vec<C64>>) {
    let mut value = vec![C64::new(0.0, 0.0); n];
    let mut jac = Vec::with_capacity(primes.len());
    for &p in primes {
        let lp = (p as f64).ln();
        let (l_max, _) = euler_l_cutoff(desc, p, sigma0, n.saturating_sub(1) + 1, 1e-14);
        let phase = theta.get(p);
        let mut col = vec![C64::new(0.0, 0.0); n];
        for l in 1..=l_max {
            let b = desc.euler_log_coeff(p, l);
            if b.norm() == 0.0 {
                continue;
            }
            let ll = l as f64 * lp;
            let base = b * C64::from_polar(1.0, -2.0 * PI * l as f64 * phase) * (-sigma0 * ll).exp();
            let dbase = base * C64::new(0.0, -2.0 * PI * l as f64);
            let mut pow = 1.0;
            for k in 0..n {
                value[k] += base * pow;
                col[k] += dbase * pow;
                pow *= -ll;
            }
        }
        jac.push(col);
    }
    (value, jac)
}

fn max_gap(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Runs the construction end to end and returns the assembled phases with
/// the residuals `|∂^k log L_{P(Q)}(σ0, θ⋆) - c_k|`.
pub fn assemble_theta_star(desc: &LFunctionDescriptor, params: &PipelineParams, c: &[C64]) -> Result<Construction> {
    let n = params.n;
    if c.len() != n {
        return Err(Error::invalid(format!("target has {} entries, order is {n}", c.len())));
    }
    if c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::invalid("target is not finite"));
    }
    if params.q > DEFAULT_SIEVE_LIMIT as f64 {
        return Err(Error::pipeline(
            "prime range",
            format!("Q = {} exceeds the sieve limit {DEFAULT_SIEVE_LIMIT}", params.q),
        ));
    }
    let sigma0 = params.sigma0;
    let table: &PrimeTable = sieve::shared();
    let all = table.up_to(params.q);

    // Greedy background phases on P(Q).
    let theta0 = greedy_theta0(desc, params.q.max(2.0))?;

    // Anchor primes in (X, 2X] with |a(p)| > μ.
    let anchors: Vec<u64> = table
        .in_interval(params.x, 2.0 * params.x)
        .iter()
        .copied()
        .filter(|&p| desc.dirichlet_coeff(p).norm() > params.mu)
        .take(n)
        .collect();
    if anchors.len() < n {
        return Err(Error::pipeline(
            "anchor primes",
            format!(
                "found {} primes p in ({}, {}] with |a(p)| > μ = {}, need {n}",
                anchors.len(),
                params.x,
                2.0 * params.x,
                params.mu
            ),
        ));
    }

    let radius = |p: u64| desc.euler_log_coeff(p, 1).norm() * (p as f64).powf(-sigma0);
    let mut plans = Vec::with_capacity(n);
    let mut blocks = Vec::with_capacity(n);
    let mut in_m: Vec<u64> = Vec::new();
    let anchor_top = anchors.iter().map(|&p| radius(p)).fold(0.0, f64::max);
    let anchor_low = anchors.iter().map(|&p| radius(p)).fold(f64::INFINITY, f64::min);
    let mut interval_top: f64 = 0.0;
    for (j, &anchor) in anchors.iter().enumerate() {
        let lo = 2f64.powi(j as i32) * params.y;
        let hi = lo + params.h;
        let interval = table.in_interval(lo, hi);
        let mut primes = vec![anchor];
        primes.extend(interval.iter().copied().filter(|&p| radius(p) > 0.0));
        let interval_sum: f64 = interval.iter().map(|&p| radius(p)).sum();
        interval_top = interval.iter().map(|&p| radius(p)).fold(interval_top, f64::max);
        let radii: Vec<f64> = primes.iter().map(|&p| radius(p)).collect();
        let aligned = primes
            .iter()
            .map(|&p| desc.euler_log_coeff(p, 1).arg() / (2.0 * PI))
            .collect();
        in_m.extend(interval.iter().copied());
        in_m.push(anchor);
        blocks.push(BlockReport {
            j,
            anchor,
            interval: (lo, hi),
            primes: primes.len(),
            capacity: radii.iter().sum(),
            target: C64::new(0.0, 0.0),
            target_abs: 0.0,
            solvable: false,
            full_norm_fits: false,
            anchor_covered: anchor_top <= interval_sum,
        });
        plans.push(BlockPlan {
            primes,
            radii,
            aligned,
        });
    }
    in_m.sort_unstable();
    if in_m.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::pipeline("block layout", "prime blocks overlap"));
    }
    if in_m.last().map_or(false, |&p| p as f64 > params.q) {
        return Err(Error::pipeline("block layout", "blocks reach beyond Q"));
    }
    let anchors_dominate = anchor_low >= interval_top;

    // Background γ over P(Q) \ M with the greedy phases.
    let outside: Vec<u64> = all
        .iter()
        .copied()
        .filter(|p| in_m.binary_search(p).is_err())
        .collect();
    let gamma = finite_log_product_all(desc, &outside, sigma0, &theta0, n);

    // Distribute c - γ over the blocks.
    let system = NodeSystem::new(params.y, n)
        .map_err(|e| Error::pipeline("node system", e.to_string()))?;
    let mut rhs: Vec<C64> = c.iter().zip(&gamma).map(|(a, b)| a - b).collect();
    let z = system.solve(&rhs)?;
    let z_norm = l1(&z);
    for (b, &zj) in blocks.iter_mut().zip(&z) {
        b.target = zj;
        b.target_abs = zj.norm();
        b.solvable = zj.norm() <= b.capacity;
        b.full_norm_fits = z_norm <= b.capacity;
    }
    if let Some(b) = blocks.iter().find(|b| !b.solvable) {
        return Err(Error::pipeline(
            "block solvability",
            format!(
                "block {}: |z_{}| = {:.6} exceeds the attainable radius {:.6} (Σ |b(p)| p^-σ0 over {} primes)",
                b.j, b.j, b.target_abs, b.capacity, b.primes
            ),
        ));
    }

    let realize = |targets: &[C64], theta: &mut PhaseAssignment| -> Result<()> {
        for (plan, &zj) in plans.iter().zip(targets) {
            let phi = realize_phase_sum(&plan.radii, zj)
                .map_err(|e| Error::pipeline("block realization", e.to_string()))?;
            for ((&p, &f), &al) in plan.primes.iter().zip(&phi).zip(&plan.aligned) {
                theta.set(p, f + al);
            }
        }
        Ok(())
    };

    let mut theta = theta0.clone();
    realize(&z, &mut theta)?;
    let achieved_m = |theta: &PhaseAssignment| finite_log_product_all(desc, &in_m, sigma0, theta, n);
    let total = |m: &[C64]| -> Vec<C64> { m.iter().zip(&gamma).map(|(a, b)| a + b).collect() };
    let mut best_gap = max_gap(&total(&achieved_m(&theta)), c);

    // Fold the measured remainders back into the right-hand side while the
    // corrected targets stay attainable.
    let mut refinement_rounds = 0;
    for _ in 0..30 {
        if best_gap < 1e-14 {
            break;
        }
        let now = total(&achieved_m(&theta));
        let candidate_rhs: Vec<C64> = rhs
            .iter()
            .zip(c.iter().zip(&now))
            .map(|(r, (ck, nk))| r + (ck - nk))
            .collect();
        let zc = match system.solve(&candidate_rhs) {
            Ok(v) => v,
            Err(_) => break,
        };
        let mut trial = theta.clone();
        if realize(&zc, &mut trial).is_err() {
            break;
        }
        let gap = max_gap(&total(&achieved_m(&trial)), c);
        if gap >= best_gap {
            break;
        }
        best_gap = gap;
        theta = trial;
        rhs = candidate_rhs;
        refinement_rounds += 1;
    }

    // Minimum-norm Gauss–Newton steps on the phases of M.
    let mut polish_steps = 0;
    for _ in 0..60 {
        if best_gap < 1e-14 {
            break;
        }
        let (value, jac) = block_jacobian(desc, &in_m, sigma0, &theta, n);
        let resid: Vec<C64> = total(&value).iter().zip(c).map(|(a, b)| a - b).collect();
        let m = in_m.len();
        let jm = DMatrix::from_fn(2 * n, m, |r, col| {
            let v = jac[col][r / 2];
            if r % 2 == 0 {
                v.re
            } else {
                v.im
            }
        });
        let f = DVector::from_fn(2 * n, |r, _| {
            let v = resid[r / 2];
            if r % 2 == 0 {
                v.re
            } else {
                v.im
            }
        });
        let gram = &jm * jm.transpose();
        let Some(w) = gram.lu().solve(&f) else { break };
        let step = jm.transpose() * w;
        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let mut trial = theta.clone();
            for (i, &p) in in_m.iter().enumerate() {
                trial.set(p, theta.get(p) - scale * step[i]);
            }
            let gap = max_gap(&total(&achieved_m(&trial)), c);
            if gap < best_gap {
                best_gap = gap;
                theta = trial;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
        polish_steps += 1;
    }

    // Independent recomputation over the whole of P(Q).
    let achieved = finite_log_product_all(desc, all, sigma0, &theta, n);
    let residuals = achieved.iter().zip(c).map(|(a, b)| (a - b).norm()).collect();
    Ok(Construction {
        params: params.clone(),
        theta_star: theta,
        anchors,
        gamma,
        z,
        blocks,
        anchors_dominate,
        achieved,
        residuals,
        refinement_rounds,
        polish_steps,
    })
}

/// `∂^k log L_{P(Q)}(σ0, θ0)` with the greedy phases on every prime up to `Q`.
pub fn greedy_product_values(desc: &LFunctionDescriptor, q: f64, sigma0: f64, n: usize) -> Result<Vec<C64>> {
    let theta0 = greedy_theta0(desc, q)?;
    Ok(finite_log_product_all(desc, sieve::shared().up_to(q), sigma0, &theta0, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfunc::{builtin_zeta, null_descriptor};

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| {
            let d = (x - y).abs();
            d < 1e-12 || (1.0 - d) < 1e-12
        })
    }

    #[test]
    fn disk_filling_examples() {
        assert!(close(&realize_phase_sum(&[1.0, 1.0], C64::new(2.0, 0.0)).unwrap(), &[0.0, 0.0]));
        assert!(close(&realize_phase_sum(&[1.0, 1.0], C64::new(0.0, 0.0)).unwrap(), &[0.0, 0.5]));
        assert!(close(&realize_phase_sum(&[1.0, 1.0], C64::new(1.0, 1.0)).unwrap(), &[0.0, 0.75]));
    }

    #[test]
    fn disk_filling_rejections() {
        assert!(realize_phase_sum(&[1.0, 1.0], C64::new(2.5, 0.0)).is_err());
        assert!(realize_phase_sum(&[1.0, 3.0], C64::new(1.0, 0.0)).is_err());
        assert!(realize_phase_sum(&[1.0, 1.0, 5.0], C64::new(5.0, 0.0)).is_err());
        assert!(realize_phase_sum(&[1.0, 0.0], C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn greedy_zeta_alternates() {
        let g = greedy_theta0_traced(&builtin_zeta(), 7.0).unwrap();
        let sums: Vec<f64> = g.partial_sums.iter().map(|s| s.1).collect();
        assert_eq!(sums, vec![1.0, 0.0, 1.0, 0.0]);
        assert_eq!(g.theta.get(3), 0.5);
        let null = greedy_theta0_traced(&null_descriptor(), 100.0).unwrap();
        assert!(null.theta.iter().all(|(_, t)| t == 0.0));
        assert!(null.partial_sums.iter().all(|s| s.1 == 0.0));
    }

    #[test]
    fn gamma_of_null_descriptor() {
        let d = null_descriptor();
        let th = greedy_theta0(&d, 1e4).unwrap();
        let g = gamma_targets(&d, &th, 0.75, 3, 1e-6).unwrap();
        assert!(g.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn practical_mode_checks() {
        let z = builtin_zeta();
        let c = [C64::new(0.1, 0.0), C64::new(0.05, 0.0)];
        let bad = PracticalSizes {
            x: 50.0,
            y: 90.0,
            h: 90.0,
            q: 2000.0,
        };
        assert!(derive_pipeline_params(&z, 0.75, 2, 0.5, &c, ModeRequest::Practical(bad)).is_err());
        assert!(derive_pipeline_params(&z, 0.4, 2, 0.5, &c, ModeRequest::Practical(bad)).is_err());
    }

    #[test]
    fn phase_file_round_trip() {
        let mut t = PhaseAssignment::new();
        t.set(3, 0.25);
        t.set(2, 0.1);
        t.set(5, 1.25);
        let back = PhaseAssignment::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.get(5), 0.25);
        assert_eq!(back.get(7), 0.0);
    }
}
