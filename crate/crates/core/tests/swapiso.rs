use std::f64::consts::FRAC_PI_2;

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selftest_core::npa::OperatorTable;
use selftest_core::qcore::{self, Mat2, Realization, StateVector, C64};
use selftest_core::swapiso::{self, SwapGenerators};

fn random_unitary_observable(rng: &mut ChaCha8Rng) -> Mat2 {
    // U diag(±1) U† with U a random SU(2) element.
    let (a, b, c, d): (f64, f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen(), rng.gen());
    let v = [a - 0.5, b - 0.5, c - 0.5, d - 0.5];
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
    let (w, x, y, z) = (v[0] / n, v[1] / n, v[2] / n, v[3] / n);
    let u = Mat2::new(C64::new(w, x), C64::new(y, z), C64::new(-y, z), C64::new(w, -x));
    let s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let diag = Mat2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0));
    u * diag * u.adjoint()
}

fn random_general_realization(rng: &mut ChaCha8Rng) -> Realization {
    let amps: Vec<C64> = (0..8).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let state = StateVector::normalized(amps).unwrap();
    let mats = [2, 2, 3].map(|n| (0..n).map(|_| random_unitary_observable(rng)).collect::<Vec<_>>());
    Realization::from_matrices(state, mats).unwrap()
}

#[test]
fn ideal_general_fidelity_is_one() {
    for k in 0..=10 {
        let theta = FRAC_PI_2 * k as f64 / 10.0;
        let real = qcore::ideal_realization_general(theta).unwrap();
        assert_abs_diff_eq!(swapiso::fidelity(&real, theta).unwrap(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn ideal_result1_fidelity_is_one() {
    let real = qcore::ideal_realization_result1().unwrap();
    let f = swapiso::fidelity(&real, qcore::result1::theta()).unwrap();
    assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
}

#[test]
fn isometry_preserves_norm_and_ancilla_support() {
    let real = qcore::ideal_realization_general(0.6).unwrap();
    let out = swapiso::apply_isometry(&real).unwrap();
    assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-12);
    // Ancilla patterns that the target state does not populate carry no weight.
    for pattern in [0b011, 0b101, 0b110] {
        assert!(out.ancilla_component(pattern).norm() < 1e-12, "pattern {pattern:03b}");
    }
    let rho = swapiso::rho_swap(&real).unwrap();
    assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-12);
    assert!((&rho - rho.adjoint()).norm() < 1e-12);
}

#[test]
fn swap_of_wrong_target_is_below_one() {
    let real = qcore::ideal_realization_general(0.0).unwrap();
    let f = swapiso::fidelity(&real, FRAC_PI_2).unwrap();
    assert!(f < 0.5, "{f}");
}

#[test]
fn fidelity_functional_matches_direct_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let gens = SwapGenerators::uniform(1);
    for i in 0..100 {
        let theta = FRAC_PI_2 * rng.gen::<f64>();
        let real = random_general_realization(&mut rng);
        let functional = swapiso::fidelity_functional(theta, &gens).unwrap();
        let table = OperatorTable::from_realization(&real);
        let via_moments = functional.evaluate(&table, &real.state).unwrap();
        let direct = swapiso::fidelity(&real, theta).unwrap();
        assert!((via_moments - direct).abs() < 1e-10, "sample {i}: {via_moments} vs {direct}");
        assert!((-1e-12..=1.0 + 1e-12).contains(&direct));
    }
}

#[test]
fn rho_swap_coefficients_agree_with_circuit() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let real = random_general_realization(&mut rng);
    let ops = swapiso::SwapOperators::direct(&real).unwrap();
    let a = swapiso::rho_swap_coefficients(&real.state, &ops);
    let b: DMatrix<C64> = swapiso::rho_swap(&real).unwrap();
    assert!((a - b).norm() < 1e-10);
}

#[test]
fn result1_subspace_relations_hold() {
    let real = qcore::ideal_realization_result1().unwrap();
    let report = swapiso::verify_subspace_relations(&real, 1e-10).unwrap();
    for r in &report.relations {
        assert!(r.pass, "{} ({}): residual {:e}", r.id, r.description, r.residual);
    }
    assert!(report.pass);
    assert!(report.max_residual() < 1e-10);
}
