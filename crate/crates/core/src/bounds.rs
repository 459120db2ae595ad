//! Closed-form constants and thresholds of the effective universality theorem.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lfunc::LFunctionDescriptor;
use crate::powseries::{l1, log_branch};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveConstants {
    pub sigma0: f64,
    pub e_l: f64,
    /// Exponent with `H = Y^A`.
    pub a: f64,
    pub eta: f64,
    pub d1_1: f64,
    pub b_exp: f64,
    pub d1: f64,
    pub d: f64,
    pub mu: f64,
    pub rho: f64,
    pub h_exponent: f64,
    pub x_exponent: f64,
}

/// Open interval of admissible `σ0`: `(max{σ_L, 1 - 2E_L}, 1)`.
pub fn admissible_range(desc: &LFunctionDescriptor) -> (f64, f64) {
    (desc.sigma_l.max(1.0 - 2.0 * desc.e_l), 1.0)
}

pub fn check_sigma0(desc: &LFunctionDescriptor, sigma0: f64) -> Result<()> {
    if !sigma0.is_finite() {
        return Err(Error::range("σ0 must be finite"));
    }
    if sigma0 <= desc.sigma_l {
        return Err(Error::range(format!(
            "σ0 = {sigma0} violates σ0 > σ_L = {}",
            desc.sigma_l
        )));
    }
    let floor = 1.0 - 2.0 * desc.e_l;
    if sigma0 <= floor {
        return Err(Error::range(format!(
            "σ0 = {sigma0} violates σ0 > 1 - 2E_L = {floor}"
        )));
    }
    if sigma0 >= 1.0 {
        return Err(Error::range(format!("σ0 = {sigma0} violates σ0 < 1")));
    }
    Ok(())
}

pub fn compute_constants(desc: &LFunctionDescriptor, sigma0: f64) -> Result<EffectiveConstants> {
    check_sigma0(desc, sigma0)?;
    let e = desc.e_l;
    let a = 0.5 * (sigma0.max(1.0 - e) + 0.5 * (1.0 + sigma0));
    let eta = 0.5 * ((1.0 - e) / 2.0).min((a - sigma0) / 2.0).min(1.0 + sigma0 - 2.0 * a);
    let scale = sigma0 / (sigma0 - eta);
    let d1_1 = scale * (a - sigma0 - 2.0 * eta);
    let b_exp = (scale * (1.0 + sigma0 - 2.0 * a - eta)).min(sigma0 - eta);
    let d1 = 2.0 * scale * (1.0 / d1_1).max(1.0 / b_exp.min(sigma0 - 0.5));
    let d = d1.max(8.0 / (sigma0 - 0.5));
    let mid = 0.5 * (desc.sigma_l + sigma0);
    let delta = desc.delta_l(mid);
    Ok(EffectiveConstants {
        sigma0,
        e_l: e,
        a,
        eta,
        d1_1,
        b_exp,
        d1,
        d,
        mu: (desc.kappa / 8.0).sqrt(),
        rho: desc.kappa / 4.0,
        h_exponent: delta / 2.0,
        x_exponent: (1.0 / 200.0f64).min(delta / 10.0),
    })
}

impl EffectiveConstants {
    /// Every structural inequality the constants must satisfy.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let s = self.sigma0;
        if !(self.a > s && self.a < 0.5 * (1.0 + s)) {
            out.push(format!("A = {} not in (σ0, (1+σ0)/2)", self.a));
        }
        if !(self.a > 1.0 - self.e_l && self.a < 1.0) {
            out.push(format!("A = {} not in (1 - E_L, 1)", self.a));
        }
        for (name, v) in [("η", self.eta), ("d1^(1)", self.d1_1), ("B", self.b_exp)] {
            if !(v > 0.0) {
                out.push(format!("{name} = {v} is not positive"));
            }
        }
        if self.d < 8.0 / (s - 0.5) || self.d < self.d1 {
            out.push(format!("d = {} below its defining maximum", self.d));
        }
        out
    }
}

/// `log log T = C1 (‖c‖ + 1/ε)^d`; `T` itself overflows any float.
pub fn threshold_t_main(consts: &EffectiveConstants, c: &[C64], eps: f64, c1: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::range(format!("ε = {eps} must lie in (0, 1)")));
    }
    Ok(c1 * (l1(c) + 1.0 / eps).powf(consts.d))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::range(format!("ε = {eps} must be positive")));
    }
    Ok(())
}

/// `|log c0| + (‖c‖/|c0|)^{(N-1)²} (1 + |c0|)/ε` with a chosen log branch.
pub fn b_quantity(n: usize, c: &[C64], eps: f64, branch: i64) -> Result<f64> {
    check_eps(eps)?;
    let c0 = *c.first().ok_or_else(|| Error::invalid("empty target vector"))?;
    if c0.norm() == 0.0 {
        return Err(Error::invalid("c_0 must be nonzero"));
    }
    let m = n.saturating_sub(1) as i32;
    Ok(log_branch(c0, branch).norm() + (l1(c) / c0.norm()).powi(m * m) * (1.0 + c0.norm()) / eps)
}

/// `|log b0| + (‖b‖/ε)^{N²}`.
pub fn a_quantity_voronin(n: usize, b: &[C64], eps: f64, branch: i64) -> Result<f64> {
    check_eps(eps)?;
    let b0 = *b.first().ok_or_else(|| Error::invalid("empty target vector"))?;
    if b0.norm() <= eps {
        return Err(Error::range(format!("|b0| = {} must exceed ε = {eps}", b0.norm())));
    }
    let n = n as i32;
    Ok(log_branch(b0, branch).norm() + (l1(b) / eps).powi(n * n))
}

/// Smallest `N >= 1` with `M δ0^N / (1 - δ0) < ε/3`.
pub fn gl_n_choice(m_g: f64, delta0: f64, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    if !(delta0 > 0.0 && delta0 < 1.0) {
        return Err(Error::range(format!("δ0 = {delta0} must lie in (0, 1)")));
    }
    if !(m_g >= 0.0) || !m_g.is_finite() {
        return Err(Error::range(format!("M(g) = {m_g} must be finite and nonnegative")));
    }
    let mut n = 1usize;
    while m_g * delta0.powi(n as i32) / (1.0 - delta0) >= eps / 3.0 {
        n += 1;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfunc::builtin_zeta;

    fn re(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn zeta_three_quarters() {
        let k = compute_constants(&builtin_zeta(), 0.75).unwrap();
        assert_eq!(k.a, 0.8125);
        assert_eq!(k.eta, 0.015625);
        assert!((k.d1_1 - 0.031_914_893_617_021_28).abs() < 1e-15);
        assert!((k.b_exp - 0.111_702_127_659_574_5).abs() < 1e-15);
        assert!((k.d - 64.0).abs() < 1e-12);
        assert!(k.violations().is_empty());
    }

    #[test]
    fn range_errors_name_the_inequality() {
        let err = compute_constants(&builtin_zeta(), 0.4).unwrap_err();
        assert!(err.to_string().contains("σ_L"));
        assert!(compute_constants(&builtin_zeta(), 1.0).is_err());
    }

    #[test]
    fn quantities() {
        assert_eq!(b_quantity(1, &[re(1.0)], 0.5, 0).unwrap(), 4.0);
        assert!((b_quantity(2, &[re(1.0), re(1.0)], 0.1, 0).unwrap() - 40.0).abs() < 1e-12);
        let e = std::f64::consts::E;
        assert!((b_quantity(3, &[re(e), re(0.0), re(0.0)], 1.0, 0).unwrap() - (2.0 + e)).abs() < 1e-12);
        assert!(b_quantity(2, &[re(0.0), re(1.0)], 1.0, 0).is_err());
        assert!((a_quantity_voronin(1, &[re(e)], 1.0, 0).unwrap() - (1.0 + e)).abs() < 1e-12);
        assert_eq!(a_quantity_voronin(1, &[re(1.0)], 0.5, 0).unwrap(), 2.0);
        assert!(a_quantity_voronin(1, &[re(0.5)], 0.5, 0).is_err());
    }

    #[test]
    fn n_choice() {
        assert_eq!(gl_n_choice(0.0, 0.5, 0.1).unwrap(), 1);
        assert_eq!(gl_n_choice(1.0, 0.5, 0.3).unwrap(), 5);
    }

    #[test]
    fn threshold_worked_value() {
        let k = compute_constants(&builtin_zeta(), 0.75).unwrap();
        assert_eq!(threshold_t_main(&k, &[re(0.0)], 0.5, 1.0).unwrap(), 2f64.powi(64));
    }
}
