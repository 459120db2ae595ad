//! Truncated formal power series over ℂ and the exp/log polynomial maps.
//!
//! `F_n` are the coefficients of `exp(Σ z_n X^n)` and `G_n` the coefficients
//! of `log(1 + Σ w_n X^n)`; the two maps are mutually inverse. All norms on
//! coefficient vectors are ℓ¹.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// ℓ¹ norm of a complex vector; the empty vector has norm 0.
pub fn l1(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

/// Power series truncated after `X^{n_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<C64>,
}

impl TruncatedSeries {
    pub fn new(coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least a constant term");
        TruncatedSeries { coeffs }
    }

    pub fn zero(n_max: usize) -> Self {
        TruncatedSeries {
            coeffs: vec![C64::new(0.0, 0.0); n_max + 1],
        }
    }

    pub fn constant(c: C64, n_max: usize) -> Self {
        let mut s = Self::zero(n_max);
        s.coeffs[0] = c;
        s
    }

    /// `a + X` truncated at `n_max`.
    pub fn linear(a: C64, n_max: usize) -> Self {
        let mut s = Self::constant(a, n_max);
        if n_max >= 1 {
            s.coeffs[1] = C64::new(1.0, 0.0);
        }
        s
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> C64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.n_max().min(other.n_max());
        TruncatedSeries::new((0..=n).map(|i| self.coeffs[i] + other.coeffs[i]).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.n_max().min(other.n_max());
        TruncatedSeries::new((0..=n).map(|i| self.coeffs[i] - other.coeffs[i]).collect())
    }

    pub fn scale(&self, k: C64) -> Self {
        TruncatedSeries::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n_max().min(other.n_max());
        let mut out = vec![C64::new(0.0, 0.0); n + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                out[i + j] += a * b;
            }
        }
        TruncatedSeries::new(out)
    }

    /// Coefficientwise modulus `α^abs`.
    pub fn abs(&self) -> Self {
        TruncatedSeries::new(self.coeffs.iter().map(|c| C64::new(c.norm(), 0.0)).collect())
    }

    /// `exp` of a series with zero constant term, via `n E_n = Σ k A_k E_{n-k}`.
    pub fn exp(&self) -> Result<Self> {
        if self.coeffs[0] != C64::new(0.0, 0.0) {
            return Err(Error::invalid("exp needs a zero constant term"));
        }
        let n = self.n_max();
        let mut e = vec![C64::new(0.0, 0.0); n + 1];
        e[0] = C64::new(1.0, 0.0);
        for m in 1..=n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 1..=m {
                acc += self.coeffs[k] * e[m - k] * k as f64;
            }
            e[m] = acc / m as f64;
        }
        Ok(TruncatedSeries::new(e))
    }

    /// `log` of a series with constant term 1, via `n L_n = n B_n - Σ k L_k B_{n-k}`.
    pub fn log(&self) -> Result<Self> {
        if (self.coeffs[0] - C64::new(1.0, 0.0)).norm() > 1e-14 {
            return Err(Error::invalid("log needs constant term 1"));
        }
        Ok(self.log_unit())
    }

    fn log_unit(&self) -> Self {
        let n = self.n_max();
        let b = &self.coeffs;
        let mut l = vec![C64::new(0.0, 0.0); n + 1];
        for m in 1..=n {
            let mut acc = b[m] * m as f64;
            for k in 1..m {
                acc -= l[k] * b[m - k] * k as f64;
            }
            l[m] = acc / m as f64;
        }
        TruncatedSeries::new(l)
    }

    /// Non-constant part of `log(self)`, normalising by the constant term.
    /// The constant slot of the result is left at zero so no branch is chosen.
    pub fn log_tail(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0.norm() == 0.0 {
            return Err(Error::invalid("log of a series with zero constant term"));
        }
        Ok(self.scale(c0.inv()).log_unit())
    }

    /// Evaluates the polynomial at `x`.
    pub fn eval(&self, x: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, c) in self.coeffs.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            let c = if c.im == 0.0 {
                format!("{}", c.re)
            } else {
                format!("({}{:+}i)", c.re, c.im)
            };
            match n {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}X")?,
                _ => write!(f, "{c}X^{n}")?,
            }
        }
        write!(f, " + O(X^{})", self.n_max() + 1)
    }
}

/// `f(X; z) = Σ_{n=1}^{N} z_n X^n`, truncated at `X^N`.
pub fn f_map(z: &[C64]) -> TruncatedSeries {
    let mut coeffs = Vec::with_capacity(z.len() + 1);
    coeffs.push(C64::new(0.0, 0.0));
    coeffs.extend_from_slice(z);
    TruncatedSeries::new(coeffs)
}

/// `(F_1(z), ..., F_N(z))`: degree-1..N coefficients of `exp(f(X; z))`.
pub fn f_polys(z: &[C64]) -> Vec<C64> {
    let e = f_map(z).exp().expect("f_map has zero constant term");
    e.into_coeffs().into_iter().skip(1).collect()
}

/// `(G_1(w), ..., G_N(w))`: coefficients of `log(1 + Σ w_n X^n)`.
pub fn g_polys(w: &[C64]) -> Vec<C64> {
    let mut s = f_map(w);
    s.coeffs[0] = C64::new(1.0, 0.0);
    s.log_unit().into_coeffs().into_iter().skip(1).collect()
}

/// `h(X; z) = -log(1 - Σ |z_n| X^n)`; all coefficients are nonnegative reals.
pub fn h_series(z: &[C64]) -> TruncatedSeries {
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    coeffs.extend(z.iter().map(|c| C64::new(-c.norm(), 0.0)));
    TruncatedSeries::new(coeffs).log_unit().scale(C64::new(-1.0, 0.0))
}

/// `α ⊴ β`: `|a_n| <= b_n` for every `n`, with an absolute slack for roundoff.
pub fn majorizes_with_slack(
    alpha: &TruncatedSeries,
    beta: &TruncatedSeries,
    slack: f64,
) -> Result<bool> {
    if alpha.n_max() != beta.n_max() {
        return Err(Error::invalid("majorization needs equal truncation degrees"));
    }
    for b in beta.coeffs() {
        if b.im != 0.0 || b.re < 0.0 {
            return Err(Error::invalid(format!(
                "majorant coefficient {b} is not a nonnegative real"
            )));
        }
    }
    Ok(alpha
        .coeffs()
        .iter()
        .zip(beta.coeffs())
        .all(|(a, b)| a.norm() <= b.re + slack * (1.0 + b.re)))
}

pub fn majorizes(alpha: &TruncatedSeries, beta: &TruncatedSeries) -> Result<bool> {
    majorizes_with_slack(alpha, beta, 0.0)
}

/// Explicit bound on `‖α‖` from `F_{[N-1]}(α)`, obtained by evaluating the
/// majorant chain at `X = 1/(3(1 + ‖F‖))`.
pub fn alpha_norm_bound(fvals: &[C64]) -> f64 {
    let m = fvals.len();
    if m == 0 {
        return 0.0;
    }
    let geometric: f64 = (1..=m).map(|n| 3f64.powi(-(n as i32))).sum();
    (3.0 * (1.0 + l1(fvals))).powi(m as i32) * (1.0 - geometric).ln().abs()
}

/// Principal log shifted by `branch` full turns.
pub fn log_branch(c: C64, branch: i64) -> C64 {
    let l = c.ln();
    C64::new(l.re, l.im + 2.0 * std::f64::consts::PI * branch as f64)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Splits a target derivative vector `c = (c_0, ..., c_{N-1})` into the log
/// data `(α_0, α)` with `α_0 = log c_0` and `α = G(β)`, `β_k = c_k/(c_0 k!)`.
pub fn exp_log_chain(c: &[C64], branch: i64) -> Result<(C64, Vec<C64>)> {
    let c0 = *c
        .first()
        .ok_or_else(|| Error::invalid("empty target vector"))?;
    if c0.norm() == 0.0 {
        return Err(Error::invalid("c_0 must be nonzero"));
    }
    let beta: Vec<C64> = c[1..]
        .iter()
        .enumerate()
        .map(|(i, &ck)| ck / (c0 * factorial(i + 1)))
        .collect();
    Ok((log_branch(c0, branch), g_polys(&beta)))
}

/// Inverse of [`exp_log_chain`]: `c_0 = e^{α_0}`, `c_k = e^{α_0} k! F_k(α)`.
pub fn reconstruct_derivatives(alpha0: C64, alpha: &[C64]) -> Vec<C64> {
    let e = alpha0.exp();
    let mut out = vec![e];
    out.extend(
        f_polys(alpha)
            .into_iter()
            .enumerate()
            .map(|(i, f)| e * f * factorial(i + 1)),
    );
    out
}

/// Ratio `‖e^{z_0}F(z) - e^{α_0}F(α)‖ / (|e^{α_0}| (1+‖F(α)‖)^{(N-1)^2} δ)`
/// realising the implicit constant of the perturbation estimate.
pub fn perturbation_ratio(
    alpha0: C64,
    alpha: &[C64],
    z0: C64,
    z: &[C64],
    delta: f64,
) -> f64 {
    let n1 = alpha.len() as i32;
    let fa = f_polys(alpha);
    let fz = f_polys(z);
    let ea = alpha0.exp();
    let ez = z0.exp();
    let diff: f64 = fz
        .iter()
        .zip(&fa)
        .map(|(a, b)| (ez * a - ea * b).norm())
        .sum();
    diff / (ea.norm() * (1.0 + l1(&fa)).powi(n1 * n1) * delta)
}

pub mod poly {
    //! Sparse multivariate polynomials with real coefficients, used to build
    //! `F_n` symbolically and differentiate it exactly.

    use super::*;

    /// Polynomial in variables `Z_1..Z_m`; keys are exponent vectors.
    #[derive(Debug, Clone, PartialEq, Default)]
    pub struct Poly {
        pub vars: usize,
        pub terms: BTreeMap<Vec<u32>, f64>,
    }

    impl Poly {
        pub fn constant(vars: usize, c: f64) -> Self {
            let mut terms = BTreeMap::new();
            if c != 0.0 {
                terms.insert(vec![0; vars], c);
            }
            Poly { vars, terms }
        }

        pub fn var(vars: usize, j: usize) -> Self {
            let mut e = vec![0; vars];
            e[j] = 1;
            let mut terms = BTreeMap::new();
            terms.insert(e, 1.0);
            Poly { vars, terms }
        }

        pub fn add_assign_scaled(&mut self, other: &Poly, k: f64) {
            for (e, c) in &other.terms {
                *self.terms.entry(e.clone()).or_insert(0.0) += k * c;
            }
            self.terms.retain(|_, c| *c != 0.0);
        }

        pub fn mul(&self, other: &Poly) -> Poly {
            let mut out = Poly::constant(self.vars, 0.0);
            for (ea, ca) in &self.terms {
                for (eb, cb) in &other.terms {
                    let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                    *out.terms.entry(e).or_insert(0.0) += ca * cb;
                }
            }
            out.terms.retain(|_, c| *c != 0.0);
            out
        }

        /// Total degree.
        pub fn degree(&self) -> u32 {
            self.terms
                .keys()
                .map(|e| e.iter().sum::<u32>())
                .max()
                .unwrap_or(0)
        }

        /// `∂^i` for a multi-index `i` over the variables.
        pub fn derivative(&self, index: &[u32]) -> Poly {
            let mut out = Poly::constant(self.vars, 0.0);
            for (e, c) in &self.terms {
                let mut coef = *c;
                let mut ne = e.clone();
                let mut zero = false;
                for (j, &ij) in index.iter().enumerate() {
                    if ij > e[j] {
                        zero = true;
                        break;
                    }
                    for r in 0..ij {
                        coef *= (e[j] - r) as f64;
                    }
                    ne[j] = e[j] - ij;
                }
                if !zero {
                    *out.terms.entry(ne).or_insert(0.0) += coef;
                }
            }
            out.terms.retain(|_, c| *c != 0.0);
            out
        }

        pub fn eval(&self, z: &[C64]) -> C64 {
            self.terms
                .iter()
                .map(|(e, &c)| {
                    e.iter()
                        .enumerate()
                        .fold(C64::new(c, 0.0), |acc, (j, &p)| acc * z[j].powu(p))
                })
                .sum()
        }
    }

    /// Symbolic `F_1..F_n` in `n` variables via `m F_m = Σ k Z_k F_{m-k}`.
    pub fn f_symbolic(n: usize) -> Vec<Poly> {
        let mut f = vec![Poly::constant(n, 1.0)];
        for m in 1..=n {
            let mut acc = Poly::constant(n, 0.0);
            for k in 1..=m {
                let term = Poly::var(n, k - 1).mul(&f[m - k]);
                acc.add_assign_scaled(&term, k as f64 / m as f64);
            }
            f.push(acc);
        }
        f.remove(0);
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn f_map_examples() {
        let s = f_map(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(s.coeffs(), &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(f_map(&[]).coeffs(), &[c(0.0, 0.0)]);
        assert_eq!(f_map(&[c(0.0, 1.0)]).coeff(1), c(0.0, 1.0));
    }

    #[test]
    fn low_degree_f_and_g() {
        let z1 = c(0.3, -1.2);
        let z2 = c(-0.7, 0.4);
        let f = f_polys(&[z1, z2]);
        assert!((f[0] - z1).norm() < 1e-15);
        assert!((f[1] - (z2 + z1 * z1 / 2.0)).norm() < 1e-15);
        let g = g_polys(&[z1, z2]);
        assert!((g[1] - (z2 - z1 * z1 / 2.0)).norm() < 1e-15);
        assert_eq!(f_polys(&[c(0.0, 0.0); 3]), vec![c(0.0, 0.0); 3]);
        assert_eq!(g_polys(&[c(0.0, 0.0); 3]), vec![c(0.0, 0.0); 3]);
    }

    #[test]
    fn majorization_examples() {
        let ix = f_map(&[c(0.0, 1.0)]);
        let x = f_map(&[c(1.0, 0.0)]);
        let two_x = f_map(&[c(2.0, 0.0)]);
        assert!(majorizes(&ix, &x).unwrap());
        assert!(!majorizes(&two_x, &x).unwrap());
        assert!(majorizes(&x, &ix).is_err());
        assert!(majorizes(&x, &f_map(&[c(-1.0, 0.0)])).is_err());
    }

    #[test]
    fn alpha_bound_worked_value() {
        let b = alpha_norm_bound(&[c(0.0, 0.0)]);
        assert!((b - 3.0 * (2.0f64 / 3.0).ln().abs()).abs() < 1e-15);
        assert!((b - 1.2164).abs() < 1e-4);
        assert_eq!(alpha_norm_bound(&[]), 0.0);
    }

    #[test]
    fn exp_log_chain_examples() {
        let (a0, a) = exp_log_chain(&[c(1.0, 0.0), c(0.0, 0.0)], 0).unwrap();
        assert_eq!(a0, c(0.0, 0.0));
        assert_eq!(a, vec![c(0.0, 0.0)]);
        let (a0, a) = exp_log_chain(&[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 0).unwrap();
        assert!((a0 - c(2f64.ln(), 0.0)).norm() < 1e-15);
        assert_eq!(a, vec![c(0.0, 0.0); 2]);
        let (a0, a) = exp_log_chain(&[c(1.0, 0.0), c(1.0, 0.0)], 0).unwrap();
        assert_eq!(a0, c(0.0, 0.0));
        assert!((a[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(exp_log_chain(&[c(0.0, 0.0), c(1.0, 0.0)], 0).is_err());
        let (b0, _) = exp_log_chain(&[c(-1.0, 0.0)], 2).unwrap();
        assert!((b0.im - 5.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn symbolic_f_matches_numeric() {
        let polys = poly::f_symbolic(5);
        for (n, p) in polys.iter().enumerate() {
            assert_eq!(p.degree() as usize, n + 1);
        }
        let z = [c(0.2, 0.1), c(-0.4, 0.3), c(1.1, 0.0), c(0.0, -0.5), c(0.3, 0.3)];
        let f = f_polys(&z);
        for (p, fv) in polys.iter().zip(&f) {
            assert!((p.eval(&z) - fv).norm() < 1e-13);
        }
    }

    #[test]
    fn exp_and_log_guard_constant_terms() {
        assert!(TruncatedSeries::constant(c(1.0, 0.0), 3).exp().is_err());
        assert!(TruncatedSeries::constant(c(2.0, 0.0), 3).log().is_err());
        let s = TruncatedSeries::new(vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let l = s.log().unwrap();
        assert!((l.coeff(2) - c(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn display_is_readable() {
        let s = f_map(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(s.to_string(), "0 + 1X + 2X^2 + O(X^3)");
    }
}
