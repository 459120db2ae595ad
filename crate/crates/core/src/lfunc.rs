//! Selberg-class descriptors: coefficient providers, density and zero-density
//! constants, and functional-equation metadata.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sieve::{self, gcd, prime_power};

/// Where the Dirichlet coefficients come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    /// `a(n) = 1`.
    Zeta,
    /// `a(n) = χ(n mod q)` with a table indexed by residues `0..q`.
    Dirichlet { modulus: u64, table: Vec<C64> },
    /// Every coefficient vanishes. Useful as a degenerate test descriptor.
    Null,
}

/// Model for the zero-density exponent `Δ_L(σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZeroDensity {
    /// `(8/3)(σ - 1/2)/(3 - 2σ)`, a conservative stand-in for ζ.
    ZetaDefault,
    /// `slope · (σ - σ_L)`.
    Linear { slope: f64 },
}

impl ZeroDensity {
    pub fn eval(&self, sigma: f64, sigma_l: f64) -> f64 {
        match *self {
            ZeroDensity::ZetaDefault => (8.0 / 3.0) * (sigma - 0.5) / (3.0 - 2.0 * sigma),
            ZeroDensity::Linear { slope } => slope * (sigma - sigma_l),
        }
    }
}

/// One gamma factor `Γ(λ s + μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFactor {
    pub lambda: f64,
    pub mu: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LFunctionDescriptor {
    pub name: String,
    pub coefficients: Coefficients,
    pub kappa: f64,
    pub sigma_l: f64,
    pub zero_density: ZeroDensity,
    pub e_l: f64,
    pub log_power: f64,
    pub gamma_factors: Vec<GammaFactor>,
    pub conductor_r: f64,
    pub root_number: C64,
    pub pole_order: u32,
    /// `C` and `ϑ` in `|b(p^l)| <= C p^{lϑ}`, used for certified tails.
    pub growth_c: f64,
    pub growth_theta: f64,
}

impl LFunctionDescriptor {
    /// `a(n)`.
    pub fn dirichlet_coeff(&self, n: u64) -> C64 {
        match &self.coefficients {
            Coefficients::Zeta => C64::new(1.0, 0.0),
            Coefficients::Dirichlet { modulus, table } => table[(n % modulus) as usize],
            Coefficients::Null => C64::new(0.0, 0.0),
        }
    }

    /// `b(p^l)`; the caller is responsible for `p` being prime and `l >= 1`.
    pub fn euler_log_coeff(&self, p: u64, l: u32) -> C64 {
        let lf = l as f64;
        match &self.coefficients {
            Coefficients::Zeta => C64::new(1.0 / lf, 0.0),
            Coefficients::Dirichlet { modulus, table } => {
                table[(p % modulus) as usize].powu(l) / lf
            }
            Coefficients::Null => C64::new(0.0, 0.0),
        }
    }

    /// `b(n)` for any `n`, zero off prime powers.
    pub fn log_coeff_at(&self, n: u64) -> C64 {
        match prime_power(n) {
            Some((p, l)) => self.euler_log_coeff(p, l),
            None => C64::new(0.0, 0.0),
        }
    }

    pub fn delta_l(&self, sigma: f64) -> f64 {
        self.zero_density.eval(sigma, self.sigma_l)
    }

    /// `d_L = 2 Σ λ_j`.
    pub fn degree(&self) -> f64 {
        2.0 * self.gamma_factors.iter().map(|g| g.lambda).sum::<f64>()
    }

    pub fn is_zeta_like(&self) -> bool {
        matches!(self.coefficients, Coefficients::Zeta)
    }

    /// `(modulus, table)` for the Hurwitz decomposition; ζ is the character mod 1.
    pub fn character(&self) -> Option<(u64, Vec<C64>)> {
        match &self.coefficients {
            Coefficients::Zeta => Some((1, vec![C64::new(1.0, 0.0)])),
            Coefficients::Dirichlet { modulus, table } => Some((*modulus, table.clone())),
            Coefficients::Null => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&DescriptorDoc::from(self)).expect("descriptor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DescriptorDoc =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("descriptor JSON: {e}")))?;
        doc.try_into()
    }
}

fn zeta_gamma() -> Vec<GammaFactor> {
    vec![GammaFactor {
        lambda: 0.5,
        mu: C64::new(0.0, 0.0),
    }]
}

pub fn builtin_zeta() -> LFunctionDescriptor {
    LFunctionDescriptor {
        name: "zeta".into(),
        coefficients: Coefficients::Zeta,
        kappa: 1.0,
        sigma_l: 0.5,
        zero_density: ZeroDensity::ZetaDefault,
        e_l: 5.0 / 12.0,
        log_power: 22.0,
        gamma_factors: zeta_gamma(),
        conductor_r: std::f64::consts::PI.powf(-0.5),
        root_number: C64::new(1.0, 0.0),
        pole_order: 1,
        growth_c: 1.0,
        growth_theta: 0.0,
    }
}

/// Descriptor with every coefficient zero.
pub fn null_descriptor() -> LFunctionDescriptor {
    LFunctionDescriptor {
        name: "null".into(),
        coefficients: Coefficients::Null,
        pole_order: 0,
        growth_c: 0.0,
        ..builtin_zeta()
    }
}

const CHAR_TOL: f64 = 1e-9;

/// `L(s, χ)` from a table of character values at residues `0..modulus`.
///
/// The constants other than the coefficients copy the ζ defaults. Modulus 1
/// gives back ζ itself (same coefficients, same pole).
pub fn builtin_dirichlet(modulus: u64, table: &[C64]) -> Result<LFunctionDescriptor> {
    validate_character(modulus, table)?;
    if modulus == 1 {
        let mut z = builtin_zeta();
        z.name = "dirichlet:1".into();
        return Ok(z);
    }
    let principal = table
        .iter()
        .enumerate()
        .all(|(a, &v)| gcd(a as u64, modulus) != 1 || (v - C64::new(1.0, 0.0)).norm() < CHAR_TOL);
    let odd = (table[(modulus - 1) as usize] + C64::new(1.0, 0.0)).norm() < CHAR_TOL;
    Ok(LFunctionDescriptor {
        name: format!("dirichlet:{modulus}"),
        coefficients: Coefficients::Dirichlet {
            modulus,
            table: table.to_vec(),
        },
        gamma_factors: vec![GammaFactor {
            lambda: 0.5,
            mu: C64::new(if odd { 0.5 } else { 0.0 }, 0.0),
        }],
        conductor_r: (modulus as f64 / std::f64::consts::PI).sqrt(),
        pole_order: u32::from(principal),
        ..builtin_zeta()
    })
}

fn validate_character(modulus: u64, table: &[C64]) -> Result<()> {
    if modulus == 0 {
        return Err(Error::invalid("modulus must be positive"));
    }
    if table.len() as u64 != modulus {
        return Err(Error::invalid(format!(
            "character table has {} entries, modulus is {modulus}",
            table.len()
        )));
    }
    let q = modulus as usize;
    for (a, v) in table.iter().enumerate() {
        let unit = gcd(a as u64, modulus) == 1;
        if unit && (v.norm() - 1.0).abs() > CHAR_TOL {
            return Err(Error::invalid(format!("|χ({a})| must be 1 on units, got {v}")));
        }
        if !unit && v.norm() > CHAR_TOL {
            return Err(Error::invalid(format!("χ({a}) must vanish since gcd({a}, {modulus}) > 1")));
        }
    }
    if (table[1 % q] - C64::new(1.0, 0.0)).norm() > CHAR_TOL {
        return Err(Error::invalid("χ(1) must be 1"));
    }
    for a in 0..q {
        for b in a..q {
            let lhs = table[(a * b) % q];
            let rhs = table[a] * table[b];
            if (lhs - rhs).norm() > CHAR_TOL {
                return Err(Error::invalid(format!(
                    "table is not multiplicative: χ({a}·{b}) = {lhs} but χ({a})χ({b}) = {rhs}"
                )));
            }
        }
    }
    Ok(())
}

/// `Λ_{L,x}(n)`: `b(n) log n` up to `x`, tapered by `log(x²/n)/log x` on
/// `[x, x²]` and zero beyond.
pub fn lambda_weight(desc: &LFunctionDescriptor, x: f64, n: u64) -> Result<C64> {
    if !(x > 1.0) {
        return Err(Error::invalid(format!("x must exceed 1, got {x}")));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let nf = n as f64;
    if nf > x * x {
        return Ok(C64::new(0.0, 0.0));
    }
    let lambda = desc.log_coeff_at(n) * nf.ln();
    if nf <= x {
        Ok(lambda)
    } else {
        Ok(lambda * ((x * x / nf).ln() / x.ln()))
    }
}

/// `(1/π(x)) Σ_{p<=x} |a(p)|²`, the empirical density constant.
pub fn fit_kappa(desc: &LFunctionDescriptor, x: f64) -> f64 {
    let primes = sieve::table_for(x as u64).up_to(x).to_vec();
    if primes.is_empty() {
        return 0.0;
    }
    primes
        .iter()
        .map(|&p| desc.dirichlet_coeff(p).norm_sqr())
        .sum::<f64>()
        / primes.len() as f64
}

/// `max_{p<=limit} |a(p)|/p^η`, the fitted constant in `|a(p)| <= C p^η`.
pub fn fit_growth_constant(desc: &LFunctionDescriptor, eta: f64, limit: f64) -> f64 {
    sieve::table_for(limit as u64)
        .up_to(limit)
        .iter()
        .map(|&p| desc.dirichlet_coeff(p).norm() / (p as f64).powf(eta))
        .fold(0.0, f64::max)
}

/// Fitted constant `C` in `|b(p^l)| <= C (2^l - 1) p^{lε}/l` over `p <= p_max`,
/// `l <= l_max`.
pub fn fit_log_coeff_constant(desc: &LFunctionDescriptor, eps: f64, p_max: f64, l_max: u32) -> f64 {
    let mut c: f64 = 0.0;
    for &p in sieve::table_for(p_max as u64).up_to(p_max) {
        for l in 1..=l_max {
            let lf = l as f64;
            let bound = (2f64.powi(l as i32) - 1.0) * (p as f64).powf(lf * eps) / lf;
            c = c.max(desc.euler_log_coeff(p, l).norm() / bound);
        }
    }
    c
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DescriptorDoc {
    name: String,
    kappa: f64,
    sigma_l: f64,
    zero_density: ZeroDensity,
    e_l: f64,
    log_power: f64,
    degree: f64,
    gamma_factors: Vec<GammaFactor>,
    conductor_r: f64,
    root_number: C64,
    pole_order: u32,
    growth_c: f64,
    growth_theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    modulus: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    character: Option<Vec<C64>>,
}

impl From<&LFunctionDescriptor> for DescriptorDoc {
    fn from(d: &LFunctionDescriptor) -> Self {
        let (modulus, character) = match &d.coefficients {
            Coefficients::Dirichlet { modulus, table } => (Some(*modulus), Some(table.clone())),
            _ => (None, None),
        };
        DescriptorDoc {
            name: d.name.clone(),
            kappa: d.kappa,
            sigma_l: d.sigma_l,
            zero_density: d.zero_density,
            e_l: d.e_l,
            log_power: d.log_power,
            degree: d.degree(),
            gamma_factors: d.gamma_factors.clone(),
            conductor_r: d.conductor_r,
            root_number: d.root_number,
            pole_order: d.pole_order,
            growth_c: d.growth_c,
            growth_theta: d.growth_theta,
            modulus,
            character,
        }
    }
}

impl TryFrom<DescriptorDoc> for LFunctionDescriptor {
    type Error = Error;

    fn try_from(doc: DescriptorDoc) -> Result<Self> {
        let coefficients = match (doc.modulus, doc.character) {
            (Some(q), Some(table)) => {
                validate_character(q, &table)?;
                Coefficients::Dirichlet { modulus: q, table }
            }
            (None, None) if doc.name == "null" => Coefficients::Null,
            (None, None) => Coefficients::Zeta,
            _ => return Err(Error::invalid("modulus and character must be given together")),
        };
        let desc = LFunctionDescriptor {
            name: doc.name,
            coefficients,
            kappa: doc.kappa,
            sigma_l: doc.sigma_l,
            zero_density: doc.zero_density,
            e_l: doc.e_l,
            log_power: doc.log_power,
            gamma_factors: doc.gamma_factors,
            conductor_r: doc.conductor_r,
            root_number: doc.root_number,
            pole_order: doc.pole_order,
            growth_c: doc.growth_c,
            growth_theta: doc.growth_theta,
        };
        if !(desc.kappa > 0.0) || desc.sigma_l < 0.5 || !(desc.e_l > 0.0 && desc.e_l < 1.0) {
            return Err(Error::invalid(
                "descriptor constants need κ > 0, σ_L >= 1/2 and 0 < E_L < 1",
            ));
        }
        Ok(desc)
    }
}

/// The non-principal character mod 4.
pub fn chi4_table() -> Vec<C64> {
    [0.0, 1.0, 0.0, -1.0]
        .iter()
        .map(|&v| C64::new(v, 0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn zeta_coefficients() {
        let z = builtin_zeta();
        assert_eq!(z.euler_log_coeff(2, 1), re(1.0));
        assert_eq!(z.euler_log_coeff(2, 3), re(1.0 / 3.0));
        assert_eq!(z.e_l, 5.0 / 12.0);
        assert_eq!(z.sigma_l, 0.5);
        assert_eq!(z.degree(), 1.0);
        assert_eq!(fit_kappa(&z, 1e5), 1.0);
    }

    #[test]
    fn dirichlet_mod_four() {
        let l = builtin_dirichlet(4, &chi4_table()).unwrap();
        assert_eq!(l.dirichlet_coeff(3), re(-1.0));
        assert_eq!(l.euler_log_coeff(3, 2), re(0.5));
        assert_eq!(l.pole_order, 0);
        let one = builtin_dirichlet(1, &[re(1.0)]).unwrap();
        let z = builtin_zeta();
        for n in 1..200 {
            assert_eq!(one.dirichlet_coeff(n), z.dirichlet_coeff(n));
        }
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(builtin_dirichlet(4, &[re(0.0), re(1.0), re(0.0), re(1.0), re(0.0)]).is_err());
        // χ(2) nonzero although gcd(2, 4) = 2.
        assert!(builtin_dirichlet(4, &[re(0.0), re(1.0), re(1.0), re(-1.0)]).is_err());
        // Units mod 5 with a non-multiplicative assignment.
        let bad = [re(0.0), re(1.0), re(-1.0), re(1.0), re(-1.0)];
        assert!(builtin_dirichlet(5, &bad).is_err());
    }

    #[test]
    fn weight_branches() {
        let z = builtin_zeta();
        assert!((lambda_weight(&z, 4.0, 3).unwrap().re - 3f64.ln()).abs() < 1e-15);
        assert!((lambda_weight(&z, 4.0, 8).unwrap().re - 2f64.ln() / 2.0).abs() < 1e-15);
        assert_eq!(lambda_weight(&z, 4.0, 17).unwrap(), re(0.0));
        assert_eq!(lambda_weight(&z, 4.0, 6).unwrap(), re(0.0));
        assert!(lambda_weight(&z, 1.0, 3).is_err());
    }

    #[test]
    fn json_round_trip() {
        let l = builtin_dirichlet(4, &chi4_table()).unwrap();
        let back = LFunctionDescriptor::from_json(&l.to_json()).unwrap();
        assert_eq!(back, l);
        let z = builtin_zeta();
        assert_eq!(LFunctionDescriptor::from_json(&z.to_json()).unwrap(), z);
    }
}
