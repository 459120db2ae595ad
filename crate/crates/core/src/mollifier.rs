//! Periodised smooth bump on the circle, its Fourier coefficients, and the
//! bounds on truncating the product of its Fourier series over primes.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_complex};
use crate::sieve;

/// `∫_{-1}^{1} exp(-1/(1-x²)) dx`.
const BUMP_MASS: f64 = 0.443_993_816_168_079_4;

/// Normalised bump `φ(x) = exp(-1/(1-x²)) / mass` on `(-1, 1)`.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp() / BUMP_MASS
    }
}

/// `∫ φ(x) e^{-2πiωx} dx`, which is real since `φ` is even.
pub fn bump_transform(omega: f64) -> f64 {
    let panels = (8.0 * omega.abs()).ceil() as usize + 64;
    integrate_complex(
        |x| C64::new(bump(x) * (2.0 * PI * omega * x).cos(), 0.0),
        -1.0,
        1.0,
        1e-13,
        panels.max(4096),
    )
    .value
    .re
}

/// `sup_ω |φ̂(ω)| ω²`, scanned over `ω = nδ` for `n <= 1000`,
/// `δ ∈ {0.1, 0.01}` and then refined around the best point.
pub fn fitted_c_phi() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| {
        let score = |w: f64| bump_transform(w).abs() * w * w;
        let mut best = (0.0, 0.0);
        for delta in [0.1, 0.01] {
            for n in 1..=1000 {
                let w = n as f64 * delta;
                let s = score(w);
                if s > best.1 {
                    best = (w, s);
                }
            }
        }
        let (mut lo, mut hi) = ((best.0 - 0.01).max(0.0), best.0 + 0.01);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if score(a) > score(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        best.1.max(score(0.5 * (lo + hi)))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MollifierSpec {
    pub q: f64,
    pub delta: f64,
    /// Fourier truncation order.
    pub m: f64,
    pub c_phi: f64,
}

impl MollifierSpec {
    pub fn new(q: f64, m: f64) -> Result<Self> {
        if !(q > 2.0) {
            return Err(Error::range(format!("Q = {q} must exceed 2")));
        }
        if !(m > 2.0) {
            return Err(Error::range(format!("M = {m} must exceed 2")));
        }
        Ok(MollifierSpec {
            q,
            delta: 1.0 / q,
            m,
            c_phi: fitted_c_phi(),
        })
    }

    /// Number of primes up to `Q`.
    pub fn prime_count(&self) -> usize {
        sieve::shared().pi(self.q)
    }
}

/// `φ_δ(θ) = δ^{-1} Σ_k φ((θ + k)/δ)`, the 1-periodic scaled bump.
pub fn phi_delta(spec: &MollifierSpec, theta: f64) -> f64 {
    let t = theta - theta.round();
    let d = spec.delta;
    let reach = d.ceil() as i64 + 1;
    (-reach..=reach)
        .map(|k| bump((t + k as f64) / d))
        .sum::<f64>()
        / d
}

/// `α_n(θ0) = ∫_{-1/2}^{1/2} φ_δ(θ - θ0) e^{-2πinθ} dθ`.
pub fn fourier_alpha(spec: &MollifierSpec, n: i64, theta0: f64) -> C64 {
    C64::from_polar(1.0, -2.0 * PI * n as f64 * theta0) * bump_transform(n as f64 * spec.delta)
}

/// `Φ_Q(θ) = Π_p φ_δ(θ_p - θ⋆_p)`.
pub fn phi_q_value(spec: &MollifierSpec, theta: &[f64], theta_star: &[f64]) -> f64 {
    theta
        .iter()
        .zip(theta_star)
        .map(|(a, b)| phi_delta(spec, a - b))
        .product()
}

/// Trigamma `ψ'(x) = Σ_{n>=0} 1/(n+x)²` for `x > 0`.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 20.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + 1.0 / x
        + x2 / 2.0
        + (1.0 / x) * x2 * (1.0 / 6.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 42.0 - x2 / 30.0)))
}

/// `Σ_{|n|>m} min(1, C/(δ²n²))` over integers.
pub fn majorant_tail(c_phi: f64, delta: f64, m: f64) -> f64 {
    let k = c_phi / (delta * delta);
    let start = m.floor() + 1.0;
    let knee = k.sqrt().ceil().max(start);
    // Terms with n < knee are capped at 1.
    2.0 * ((knee - start) + k * trigamma(knee))
}

/// `Σ_n min(1, C/(δ²n²))` over all integers.
pub fn majorant_total(c_phi: f64, delta: f64) -> f64 {
    1.0 + majorant_tail(c_phi, delta, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationBounds {
    pub prime_count: usize,
    /// `Σ_{|n|>M} min(1, C_φ/(δ²n²))`.
    pub tail: f64,
    /// `Σ_n min(1, C_φ/(δ²n²))`.
    pub total: f64,
    /// Bound on the discarded part of the multi-index Fourier series.
    pub truncation: f64,
    /// Bound on `Σ_n |β_n|`.
    pub full_sum: f64,
    /// `C_0` with `full_sum = exp(C_0 Q)`.
    pub c0_fit: f64,
    /// `C_1` with `truncation = exp(C_1 Q)/M`.
    pub c1_fit: f64,
}

pub fn truncation_bounds(spec: &MollifierSpec) -> TruncationBounds {
    let k = spec.prime_count();
    let tail = majorant_tail(spec.c_phi, spec.delta, spec.m);
    let total = majorant_total(spec.c_phi, spec.delta);
    let truncation = k as f64 * tail * total.powi(k as i32 - 1);
    let full_sum = total.powi(k as i32);
    TruncationBounds {
        prime_count: k,
        tail,
        total,
        truncation,
        full_sum,
        c0_fit: full_sum.ln() / spec.q,
        c1_fit: (truncation * spec.m).ln() / spec.q,
    }
}

pub fn truncation_error_bound(spec: &MollifierSpec) -> f64 {
    truncation_bounds(spec).truncation
}

/// Truncated Fourier series of `Φ_Q` about `θ⋆`, evaluated at `θ`.
/// The multi-index box factorises into a product of per-prime sums.
pub fn truncated_reconstruction(spec: &MollifierSpec, theta: &[f64], theta_star: &[f64]) -> f64 {
    let m = spec.m.floor() as i64;
    let coeffs: Vec<f64> = (0..=m).map(|n| bump_transform(n as f64 * spec.delta)).collect();
    theta
        .iter()
        .zip(theta_star)
        .map(|(&t, &ts)| {
            let u = t - ts;
            coeffs[0]
                + 2.0
                    * (1..=m)
                        .map(|n| coeffs[n as usize] * (2.0 * PI * n as f64 * u).cos())
                        .sum::<f64>()
        })
        .product()
}

/// `∫ φ` by quadrature, for checking the normalisation.
pub fn bump_mass() -> f64 {
    integrate(bump, -1.0, 1.0, 1e-14).value.re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalised_and_periodic() {
        assert!((bump_mass() - 1.0).abs() < 1e-10);
        let s = MollifierSpec::new(10.0, 50.0).unwrap();
        assert!(phi_delta(&s, 0.0) > 0.0);
        assert_eq!(phi_delta(&s, 0.5), 0.0);
        assert!((phi_delta(&s, 0.03) - phi_delta(&s, 1.03)).abs() < 1e-12);
        assert!((phi_delta(&s, 0.0) - bump(0.0) * 10.0).abs() < 1e-12);
    }

    #[test]
    fn zeroth_coefficient_is_one() {
        let s = MollifierSpec::new(5.0, 10.0).unwrap();
        assert!((fourier_alpha(&s, 0, 0.37) - C64::new(1.0, 0.0)).norm() < 1e-10);
        for n in 1..40 {
            assert!(fourier_alpha(&s, n, 0.2).norm() <= 1.0);
        }
    }

    #[test]
    fn trigamma_values() {
        assert!((trigamma(1.0) - PI * PI / 6.0).abs() < 1e-13);
        assert!((trigamma(0.5) - PI * PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn bound_shrinks_with_m() {
        let a = truncation_error_bound(&MollifierSpec::new(3.0, 50.0).unwrap());
        let b = truncation_error_bound(&MollifierSpec::new(3.0, 100.0).unwrap());
        let c = truncation_error_bound(&MollifierSpec::new(3.0, 1e6).unwrap());
        assert!(a > b && b > c && c < 1e-4);
    }
}
