use num_complex::Complex64 as C64;
use proptest::prelude::*;

use effuniv::bounds::{b_quantity, compute_constants, threshold_t_main};
use effuniv::lfunc::builtin_zeta;
use effuniv::phases::{phase_sum, realize_phase_sum, PhaseAssignment};
use effuniv::powseries::poly::f_symbolic;
use effuniv::powseries::{
    exp_log_chain, f_map, f_polys, g_polys, h_series, l1, majorizes_with_slack, reconstruct_derivatives,
    TruncatedSeries,
};
use effuniv::vandermonde::NodeSystem;

fn complex() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b))
}

/// Vector of length `1..=max_len` with L1 norm at most `norm`.
fn bounded_vec(max_len: usize, norm: f64) -> impl Strategy<Value = Vec<C64>> {
    (prop::collection::vec(complex(), 1..=max_len), 0.0..=norm).prop_map(|(v, r)| {
        let n = l1(&v);
        if n == 0.0 {
            v
        } else {
            v.into_iter().map(|c| c * (r / n)).collect()
        }
    })
}

proptest! {
    #[test]
    fn g_inverts_f(z in bounded_vec(8, 10.0)) {
        let back = g_polys(&f_polys(&z));
        let err: Vec<C64> = back.iter().zip(&z).map(|(a, b)| a - b).collect();
        prop_assert!(l1(&err) <= 1e-12 * l1(&z).max(1e-300));
    }

    #[test]
    fn absolute_f_is_majorized_by_h(z in bounded_vec(6, 4.0)) {
        let ok = majorizes_with_slack(&f_map(&z).abs(), &h_series(&f_polys(&z)), 1e-14).unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn derivatives_of_f_are_majorized(
        z in bounded_vec(6, 3.0),
        extra in complex(),
        raw_index in prop::collection::vec(0u32..3, 5),
        forced in 0usize..5,
    ) {
        let mut z = z;
        if z.len() < 2 {
            z.push(extra * 0.5);
        }
        let n = z.len();
        let mut index = vec![0u32; n];
        index[..n - 1].copy_from_slice(&raw_index[..n - 1]);
        if index.iter().all(|&v| v == 0) {
            index[forced % (n - 1)] = 1;
        }
        let weight: usize = index.iter().enumerate().map(|(j, &v)| (j + 1) * v as usize).sum();
        let mut d = vec![C64::new(0.0, 0.0); n + 1];
        for (j, f) in f_symbolic(n).iter().enumerate() {
            d[j + 1] = f.derivative(&index).eval(&z);
        }
        let e = f_map(&z).abs().exp().unwrap();
        let mut shifted = vec![C64::new(0.0, 0.0); n + 1];
        for k in weight..=n {
            shifted[k] = e.coeff(k - weight);
        }
        let ok = majorizes_with_slack(&TruncatedSeries::new(d).abs(), &TruncatedSeries::new(shifted), 1e-14).unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn log_chain_reconstructs_targets(c in bounded_vec(6, 5.0), c0 in complex()) {
        prop_assume!(c0.norm() >= 1e-6);
        let mut full = vec![c0];
        full.extend(c);
        let (a0, a) = exp_log_chain(&full, 0).unwrap();
        let back = reconstruct_derivatives(a0, &a);
        for (x, y) in back.iter().zip(&full) {
            prop_assert!((x - y).norm() <= 1e-12 * (1.0 + y.norm()) * (1.0 + l1(&full) / c0.norm()).powi(5));
        }
    }

    #[test]
    fn vandermonde_is_exact_and_linear(
        a in prop::collection::vec(complex(), 1..=8),
        log_x in 1.0f64..6.0,
        lambda in complex(),
    ) {
        let x = 10f64.powf(log_x);
        let sys = NodeSystem::new(x, a.len()).unwrap();
        let z = sys.solve(&a).unwrap();
        prop_assert!(sys.relative_residuals(&a, &z).iter().all(|&r| r <= 1e-10));
        let scaled: Vec<C64> = a.iter().map(|v| v * lambda).collect();
        let zs = sys.solve(&scaled).unwrap();
        // Componentwise forward-error bound for one refinement step:
        // |Δz_j| <= c u Σ_k |(V^{-1})_{jk}| (|λ a_k| + Σ_m |u_m|^k |λ z_m|).
        let n = a.len();
        let inverse: Vec<Vec<C64>> = (0..n)
            .map(|k| {
                let mut e = vec![C64::new(0.0, 0.0); n];
                e[k] = C64::new(1.0, 0.0);
                sys.solve(&e).unwrap()
            })
            .collect();
        for j in 0..n {
            let scale: f64 = (0..n)
                .map(|k| {
                    let row: f64 = sys
                        .nodes()
                        .iter()
                        .zip(&zs)
                        .map(|(u, zm)| u.abs().powi(k as i32) * zm.norm())
                        .sum();
                    inverse[k][j].norm() * (scaled[k].norm() + row)
                })
                .sum();
            let gap = (zs[j] - z[j] * lambda).norm();
            prop_assert!(gap <= 1e-12 * scale, "z_{}: gap {} above {}", j, gap, 1e-12 * scale);
        }
    }

    #[test]
    fn vandermonde_solution_is_isolated(
        a in prop::collection::vec(complex(), 1..=6),
        log_x in 1.0f64..6.0,
        coord in 0usize..6,
    ) {
        let x = 10f64.powf(log_x);
        let sys = NodeSystem::new(x, a.len()).unwrap();
        let mut z = sys.solve(&a).unwrap();
        let j = coord % a.len();
        z[j] += 1e-6;
        let worst = sys.residuals(&a, &z).into_iter().fold(0.0, f64::max);
        prop_assert!(worst > 1e-8 * x.ln().powi(a.len() as i32 - 1));
    }

    #[test]
    fn disk_filling_meets_its_residual(
        radii in prop::collection::vec(0.1f64..2.0, 3..=8),
        frac in 0.0f64..1.0,
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let mut radii = radii;
        radii.sort_by(f64::total_cmp);
        let last = radii.len() - 1;
        // Cap the largest radius by the sum of the others so the annulus is a full disc.
        let others: f64 = radii[..last].iter().sum();
        radii[last] = radii[last].min(others);
        let total: f64 = radii.iter().sum();
        let target = C64::from_polar(frac * total, angle);
        let theta = realize_phase_sum(&radii, target).unwrap();
        prop_assert!(theta.iter().all(|t| (0.0..1.0).contains(t)));
        prop_assert!((phase_sum(&radii, &theta) - target).norm() <= 1e-9 * total);
    }

    #[test]
    fn phase_files_round_trip(entries in prop::collection::btree_map(2u64..100_000, 0.0f64..1.0, 0..50)) {
        let mut a = PhaseAssignment::new();
        for (&p, &t) in &entries {
            a.set(p, t);
        }
        let back = PhaseAssignment::from_json(&a.to_json()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn constants_hold_their_invariants(sigma0 in 0.5001f64..0.9999) {
        let k = compute_constants(&builtin_zeta(), sigma0).unwrap();
        prop_assert!(k.violations().is_empty(), "{:?}", k.violations());
        prop_assert!(k.d >= k.d1 && k.d >= 8.0 / (sigma0 - 0.5));
    }

    #[test]
    fn threshold_sees_only_the_norm(c in bounded_vec(4, 5.0), phase in 0.0f64..std::f64::consts::TAU) {
        let k = compute_constants(&builtin_zeta(), 0.75).unwrap();
        let u = C64::from_polar(1.0, phase);
        let rotated: Vec<C64> = c.iter().map(|v| v * u).collect();
        let a = threshold_t_main(&k, &c, 0.5, 1.0).unwrap();
        let b = threshold_t_main(&k, &rotated, 0.5, 1.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn b_quantity_monotone(c in bounded_vec(4, 3.0), c0 in complex(), eps in 0.01f64..0.9, grow in 1.0f64..3.0) {
        prop_assume!(c0.norm() > 0.05);
        let mut full = vec![c0];
        full.extend(c.iter().copied());
        let n = full.len();
        let base = b_quantity(n, &full, eps, 0).unwrap();
        prop_assert!(b_quantity(n, &full, eps * 1.1, 0).unwrap() <= base);
        let mut bigger = vec![c0];
        bigger.extend(c.iter().map(|v| v * grow));
        prop_assert!(b_quantity(n, &bigger, eps, 0).unwrap() >= base);
    }
}

#[test]
fn constants_on_a_grid() {
    let z = builtin_zeta();
    for i in 1..=100 {
        let sigma0 = 0.5 + 0.5 * i as f64 / 101.0;
        let k = compute_constants(&z, sigma0).unwrap();
        assert!(k.violations().is_empty(), "σ0 = {sigma0}: {:?}", k.violations());
    }
}
