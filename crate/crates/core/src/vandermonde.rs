//! Dual Vandermonde solve on the nodes `-log(2^j X)`.
//!
//! The system `Σ_j u_j^k z_j = a_k` is the transpose of polynomial
//! interpolation, so `z_j` is the pairing of `a` with the monomial
//! coefficients of the Lagrange basis polynomial `ℓ_j`.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::powseries::l1;

/// Largest supported system size.
pub const MAX_ORDER: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSystem {
    x: f64,
    nodes: Vec<f64>,
}

impl NodeSystem {
    /// Nodes `u_j = -log(2^j x)` for `j = 0..n`.
    pub fn new(x: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("system size must be at least 1"));
        }
        if n > MAX_ORDER {
            return Err(Error::range(format!(
                "system size {n} exceeds the conditioning guard {MAX_ORDER}"
            )));
        }
        if !(x > std::f64::consts::E) {
            return Err(Error::range(format!("X = {x} must exceed e")));
        }
        let nodes = (0..n)
            .map(|j| -(x.ln() + j as f64 * std::f64::consts::LN_2))
            .collect();
        Ok(NodeSystem { x, nodes })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Monomial coefficients of the Lagrange basis polynomial for node `j`.
    fn lagrange_row(&self, j: usize) -> Vec<f64> {
        let n = self.n();
        let mut poly = vec![0.0; n];
        poly[0] = 1.0;
        let mut deg = 0;
        let mut denom = 1.0;
        for (m, &um) in self.nodes.iter().enumerate() {
            if m == j {
                continue;
            }
            // poly *= (u - um)
            deg += 1;
            for k in (1..=deg).rev() {
                poly[k] = poly[k - 1] - um * poly[k];
            }
            poly[0] *= -um;
            denom *= self.nodes[j] - um;
        }
        poly.iter_mut().for_each(|c| *c /= denom);
        poly
    }

    fn apply_inverse(&self, a: &[C64]) -> Vec<C64> {
        (0..self.n())
            .map(|j| {
                self.lagrange_row(j)
                    .iter()
                    .zip(a)
                    .map(|(&l, &ak)| ak * l)
                    .sum()
            })
            .collect()
    }

    /// Left-hand side `Σ_j u_j^k z_j` for every `k`.
    pub fn apply(&self, z: &[C64]) -> Vec<C64> {
        (0..self.n())
            .map(|k| {
                self.nodes
                    .iter()
                    .zip(z)
                    .map(|(&u, &zj)| zj * u.powi(k as i32))
                    .sum()
            })
            .collect()
    }

    /// Unique solution of `Σ_j u_j^k z_j = a_k`, with one round of
    /// iterative refinement.
    pub fn solve(&self, a: &[C64]) -> Result<Vec<C64>> {
        if a.len() != self.n() {
            return Err(Error::invalid(format!(
                "right-hand side has length {}, system has {}",
                a.len(),
                self.n()
            )));
        }
        if a.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("right-hand side is not finite"));
        }
        let mut z = self.apply_inverse(a);
        let r: Vec<C64> = a.iter().zip(self.apply(&z)).map(|(x, y)| x - y).collect();
        for (zj, dz) in z.iter_mut().zip(self.apply_inverse(&r)) {
            *zj += dz;
        }
        Ok(z)
    }

    /// Row-scaled residuals `|r_k| / (|a_k| + Σ_j |u_j|^k |z_j|)`.
    pub fn relative_residuals(&self, a: &[C64], z: &[C64]) -> Vec<f64> {
        let lhs = self.apply(z);
        (0..self.n())
            .map(|k| {
                let scale: f64 = a[k].norm()
                    + self
                        .nodes
                        .iter()
                        .zip(z)
                        .map(|(&u, zj)| u.abs().powi(k as i32) * zj.norm())
                        .sum::<f64>();
                let r = (lhs[k] - a[k]).norm();
                if scale == 0.0 {
                    r
                } else {
                    r / scale
                }
            })
            .collect()
    }

    /// Absolute residuals `|Σ_j u_j^k z_j - a_k|`.
    pub fn residuals(&self, a: &[C64], z: &[C64]) -> Vec<f64> {
        self.apply(z)
            .iter()
            .zip(a)
            .map(|(l, r)| (l - r).norm())
            .collect()
    }

    /// `‖z‖ / ((log X)^{N-1} ‖a‖)` for the solution of `a`.
    pub fn norm_ratio(&self, a: &[C64]) -> Result<f64> {
        let z = self.solve(a)?;
        Ok(l1(&z) / (self.x.ln().powi(self.n() as i32 - 1) * l1(a)))
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = l1(&v);
    v.into_iter().map(|c| c / norm).collect()
}

/// Maximum norm ratio at a fixed `X` over `trials` random unit vectors.
pub fn norm_ratio_at(x: f64, n: usize, trials: usize, seed: u64) -> Result<f64> {
    let sys = NodeSystem::new(x, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..trials.max(1) {
        best = best.max(sys.norm_ratio(&random_unit(&mut rng, n))?);
    }
    Ok(best)
}

/// Fitted constant in `‖z‖ <= K (log X)^{N-1} ‖a‖`: the maximum ratio over
/// random unit `a` and log-uniform random `X ∈ [10, 10^6]`.
pub fn norm_bound_check(n: usize, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..trials.max(1) {
        let x = 10f64.powf(rng.gen_range(1.0..=6.0));
        let sys = NodeSystem::new(x, n)?;
        best = best.max(sys.norm_ratio(&random_unit(&mut rng, n))?);
    }
    Ok(best)
}

/// Default trial count for [`norm_bound_check`].
pub const DEFAULT_TRIALS: usize = 1000;

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn one_by_one() {
        let s = NodeSystem::new(100.0, 1).unwrap();
        assert_eq!(s.solve(&[C64::new(2.5, -1.0)]).unwrap(), vec![C64::new(2.5, -1.0)]);
        assert_eq!(norm_ratio_at(100.0, 1, 10, 1).unwrap(), 1.0);
    }

    #[test]
    fn worked_two_by_two() {
        let s = NodeSystem::new(std::f64::consts::E.powi(2), 2).unwrap();
        let z = s.solve(&[c(1.0), c(0.0)]).unwrap();
        let l2 = std::f64::consts::LN_2;
        assert!((z[0].re - (1.0 + 2.0 / l2)).abs() < 1e-12);
        assert!((z[1].re + 2.0 / l2).abs() < 1e-12);
        assert!((z[0].re - 3.88539).abs() < 1e-5);
    }

    #[test]
    fn homogeneous_and_guards() {
        let s = NodeSystem::new(50.0, 4).unwrap();
        assert_eq!(s.solve(&[c(0.0); 4]).unwrap(), vec![c(0.0); 4]);
        assert!(NodeSystem::new(50.0, 13).is_err());
        assert!(NodeSystem::new(2.0, 3).is_err());
        assert!(NodeSystem::new(50.0, 0).is_err());
    }

    #[test]
    fn larger_systems_stay_accurate() {
        for n in 1..=MAX_ORDER {
            let s = NodeSystem::new(1e3, n).unwrap();
            let a: Vec<C64> = (0..n).map(|k| C64::new(k as f64 - 1.5, 0.3 * k as f64)).collect();
            let z = s.solve(&a).unwrap();
            let worst = s.relative_residuals(&a, &z).into_iter().fold(0.0, f64::max);
            assert!(worst < 1e-10, "n = {n}: {worst}");
        }
    }
}
