use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use selftest_core::analytic::{self, CorrelationAngles};
use selftest_core::qcore::{self, result1, StateVector};

fn ideal_report(tol: f64) -> analytic::Result1Report {
    let real = qcore::ideal_realization_result1().unwrap();
    analytic::result1_check(&qcore::behavior_full(&real), tol).unwrap()
}

#[test]
fn result1_ideal_behavior_passes() {
    let r = ideal_report(1e-9);
    assert_eq!(r.conditions.len(), 24);
    assert!(r.pass, "{:?}", r.worst());
    assert_abs_diff_eq!(r.get("C1").unwrap().lhs, 0.2, epsilon = 1e-12);
}

#[test]
fn result1_projected_values() {
    let r = ideal_report(1e-9);
    let tilted = 0.6 * 12.0 / 13f64.sqrt();
    assert_abs_diff_eq!(r.get("C21").unwrap().lhs, tilted, epsilon = 1e-9);
    assert_abs_diff_eq!(r.get("C22").unwrap().lhs, tilted, epsilon = 1e-9);
    let mu = (2.0f64 / 3.0).atan();
    assert_abs_diff_eq!(result1::mu(), mu, epsilon = 1e-15);
    let xor = 8.0 / (5.0 * (2.0 * mu).sin());
    assert_abs_diff_eq!(r.get("C23").unwrap().lhs, xor, epsilon = 1e-9);
    assert_abs_diff_eq!(r.get("C24").unwrap().lhs, xor, epsilon = 1e-9);
}

#[test]
fn result1_perturbation_fails_that_condition() {
    let real = qcore::ideal_realization_result1().unwrap();
    let b = qcore::behavior_full(&real);
    let r = analytic::result1_check_with_overrides(&b, 1e-9, &[("C1".into(), 0.21)]).unwrap();
    assert!(!r.pass);
    let failed: Vec<_> = r.conditions.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
    assert_eq!(failed, ["C1"]);
    assert!(analytic::result1_check_with_overrides(&b, 1e-9, &[("C99".into(), 0.0)]).is_err());
}

#[test]
fn result1_rejects_wrong_scenario() {
    let real = qcore::ideal_realization_general(0.3).unwrap();
    assert!(analytic::result1_check(&qcore::behavior_full(&real), 1e-9).is_err());
}

#[test]
fn tilted_chsh_values() {
    let alpha = 2.0 * (5.0f64 / 13.0).sqrt();
    assert_abs_diff_eq!(analytic::tilted_quantum_max(alpha), 12.0 / 13f64.sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(analytic::tilted_classical_bound(alpha), 2.0 + alpha, epsilon = 1e-15);
    assert_abs_diff_eq!(analytic::tilted_quantum_max(0.0), 2.0 * 2f64.sqrt(), epsilon = 1e-15);
}

#[test]
fn xor_game_at_pi_over_4() {
    let mu = FRAC_PI_4;
    let g = analytic::xor_game_for_mu(mu).unwrap();
    let alpha = [[mu, -mu], [-(FRAC_PI_2 + mu), FRAC_PI_2 - mu]];
    let e = alpha.map(|row| row.map(f64::cos));
    assert_abs_diff_eq!(g.value(&e), g.game_value_max, epsilon = 1e-12);
    assert!(analytic::xor_game_coefficients(0.0, 0.0, 0.0).is_err());
}

#[test]
fn singlet_criterion_on_ideal_angles() {
    let a = analytic::ideal_singlet_angles(0.3);
    assert!(analytic::singlet_criterion_check(&a, 1e-9).is_some());
    let classical = CorrelationAngles::from_correlators([[1.0, 1.0], [1.0, -1.0]]).unwrap();
    assert!(analytic::singlet_criterion_check(&classical, 1e-9).is_none());
}

#[test]
fn schmidt_of_product_state() {
    let s = analytic::schmidt_decompose_2q(&StateVector::from_real(&[1.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
    assert_abs_diff_eq!(s.cos_beta, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(s.sin_beta, 0.0, epsilon = 1e-12);
}

proptest! {
    #[test]
    fn tilted_alpha_round_trip(theta in 0.01..FRAC_PI_4) {
        let alpha = analytic::tilted_alpha_from_theta(theta).unwrap();
        prop_assert!((0.0..2.0).contains(&alpha));
        prop_assert!((analytic::sin2theta_from_tilted_alpha(alpha) - (2.0 * theta).sin()).abs() < 1e-10);
        let c = analytic::tilted_optimal_correlators(theta);
        prop_assert!((analytic::tilted_chsh_value(alpha, &c) - analytic::tilted_quantum_max(alpha)).abs() < 1e-10);
    }

    #[test]
    fn schmidt_reconstructs(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, d in -1.0..1.0f64) {
        prop_assume!(a * a + b * b + c * c + d * d > 1e-3);
        let psi = StateVector::normalized([a, b, c, d].iter().map(|&x| qcore::C64::new(x, 0.0)).collect()).unwrap();
        let s = analytic::schmidt_decompose_2q(&psi).unwrap();
        prop_assert!(s.cos_beta >= s.sin_beta - 1e-12);
        let r = s.reconstruct();
        for (i, v) in r.iter().enumerate() {
            prop_assert!((v - psi.amplitude(i)).norm() < 1e-10);
        }
    }

    #[test]
    fn singlet_angles_satisfy_criterion(mu in 0.05..(FRAC_PI_2 - 0.05)) {
        let a = analytic::ideal_singlet_angles(mu);
        let total: f64 = a.alpha.iter().flatten().sum();
        prop_assert!(total.is_finite() && total.abs() <= 4.0 * PI);
        prop_assert!(analytic::singlet_criterion_check(&a, 1e-9).is_some());
    }
}
