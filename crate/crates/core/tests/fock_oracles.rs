#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use num_complex::Complex64;
use oampnr::fock::{abstracted_vars, f_moment, FockConfig, FockEvaluator};
use oampnr::numeric::gaussian_moment_i;
use oampnr::source::ModePairGaussian;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

#[test]
fn elements_match_quadrature() {
    for (seed, theta) in [(1u64, FRAC_PI_4), (7, FRAC_PI_3), (12, FRAC_PI_6)] {
        let st = random_state(seed);
        let q = quadrature_elements(&st, theta, 2, 28);
        let mut ev = FockEvaluator::new(&st, theta, 2, &FockConfig::default()).unwrap();
        for n in 0..=2 {
            for m in 0..=2 {
                for k in 0..=2 {
                    for l in 0..=2 {
                        let a = ev.element(n, m, k, l).unwrap();
                        let r = q[n][m][k][l];
                        assert!((a - r).norm() <= 1e-7 * r.norm() + 1e-13, "seed {seed} ({n},{m},{k},{l}): {a} vs {r}");
                    }
                }
            }
        }
    }
}

#[test]
fn f_matches_literal_sum_and_quadrature() {
    let st = random_state(3);
    let v = abstracted_vars(&st, FRAC_PI_4).unwrap();
    for e in [[0, 0, 0, 0], [2, 0, 0, 0], [1, 2, 0, 1], [0, 1, 3, 2], [3, 3, 2, 4]] {
        let f = f_moment(&v, &st, e[0], e[1], e[2], e[3]).unwrap();
        let lit = literal_f(&v, &st, e[0], e[1], e[2], e[3]);
        assert!((f - lit).abs() <= 1e-11 * lit.abs() + 1e-15, "{e:?}: {f} vs {lit}");
    }
    let f0 = f_moment(&v, &st, 0, 0, 0, 0).unwrap();
    let q0 = quadrature_f(&st, FRAC_PI_4, [0, 0, 0, 0], 24);
    assert!(((f0 - q0) / q0).abs() < 1e-8);
    let f2 = f_moment(&v, &st, 2, 0, 0, 0).unwrap();
    let q2 = quadrature_f(&st, FRAC_PI_4, [2, 0, 0, 0], 24);
    assert!(((f2 / f0 - q2 / q0) / (q2 / q0)).abs() < 1e-8);
}

#[test]
fn moment_recurrence_matches_hypergeometric_form() {
    for n in 0..=10 {
        for &(a, b) in &[(1.0, 0.0), (0.5, 1.3), (2.0, -0.7), (0.3, 2.5)] {
            let r = gaussian_moment_i(n, a, b).unwrap();
            let h = moment_hypergeometric(n, a, b);
            assert!((r - h).abs() <= 1e-8 * h.abs().max(1e-300) + 1e-14, "n={n} a={a} b={b}: {r} vs {h}");
        }
    }
}

#[test]
fn moment_example_against_adaptive_quadrature() {
    let q = adaptive_quad(&|x: f64| x.powi(3) * (-2.0 * x * x - x).exp(), -30.0, 30.0, 1e-13);
    let r = gaussian_moment_i(3, 2.0, 1.0).unwrap();
    assert!(((r - q) / q).abs() < 1e-10);
}

#[test]
fn thermal_arm_law() {
    for theta in [0.0, FRAC_PI_6, FRAC_PI_4] {
        let st = ModePairGaussian::single_mode(0, Complex64::default(), 0.7).unwrap();
        let nbar = 2.0 * 0.7 * f64::cos(theta).powi(2);
        let p = oampnr::fock::arm_marginal(&st, theta, 1, 15, &FockConfig::default()).unwrap();
        for n in 0..=15 {
            let want = thermal_law(nbar, n);
            assert!(((p[n] - want) / want).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hermiticity_and_real_diagonal(seed in 0u64..10_000, n in 0usize..4, m in 0usize..4, k in 0usize..4, l in 0usize..4) {
        let st = random_state(seed);
        let mut ev = FockEvaluator::new(&st, FRAC_PI_4, 3, &FockConfig::default()).unwrap();
        let a = ev.element(n, m, k, l).unwrap();
        let b = ev.element(k, l, n, m).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm() + 1e-15);
        let d = ev.element(n, m, n, m).unwrap();
        prop_assert!(d.im.abs() <= 1e-12 * d.norm() + 1e-16);
        prop_assert!(d.re >= -1e-12);
    }

    #[test]
    fn global_phase_leaves_probabilities_unchanged(seed in 0u64..10_000, chi in -3.1f64..3.1) {
        let st = random_state(seed);
        let ph = Complex64::from_polar(1.0, chi);
        let rot = ModePairGaussian::from_moments(st.l1, st.l2, st.mu1 * ph, st.mu2 * ph, st.sigma1, st.sigma2, st.eta, 1e-14).unwrap();
        let a = oampnr::fock::joint_pnr_distribution(&st, FRAC_PI_4, 4, 4).unwrap();
        let b = oampnr::fock::joint_pnr_distribution(&rot, FRAC_PI_4, 4, 4).unwrap();
        for n in 0..=4 {
            for m in 0..=4 {
                prop_assert!((a.get(n, m) - b.get(n, m)).abs() <= 1e-12 * a.get(n, m).max(1e-300) + 1e-16);
            }
        }
    }
}
