use std::f64::consts::FRAC_PI_2;

use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use selftest_core::npa::{
    self, build_basis, canonicalize, q1_basis, Gen, GeneralConfig, Level, Monomial, NoiseModel,
    OperatorTable, Poly, Scenario,
};
use selftest_core::qcore;

fn word() -> impl Strategy<Value = Vec<Gen>> {
    prop::collection::vec((0u8..3, 0u8..3).prop_map(|(p, o)| Gen::new(p, o)), 0..8)
}

proptest! {
    #[test]
    fn canonicalize_is_idempotent(w in word()) {
        let m = canonicalize(&w);
        prop_assert!(m.is_canonical());
        prop_assert_eq!(canonicalize(m.word()), m.clone());
        prop_assert!(m.len() <= w.len());
    }

    #[test]
    fn adjoint_is_an_involution(w in word()) {
        let m = canonicalize(&w);
        prop_assert_eq!(m.adjoint().adjoint(), m.clone());
        prop_assert_eq!(m.key(), m.adjoint().key());
        prop_assert!(m.key() <= m);
    }

    #[test]
    fn products_are_associative(a in word(), b in word(), c in word()) {
        let (a, b, c) = (canonicalize(&a), canonicalize(&b), canonicalize(&c));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.adj_mul(&b), a.adjoint().mul(&b));
        prop_assert!(a.adj_mul(&a).is_identity());
    }

    #[test]
    fn moments_respect_the_algebra(w in word(), theta in 0.0..FRAC_PI_2) {
        // Evaluating a word and its canonical form on operators of the general
        // scenario gives the same number.
        let real = qcore::ideal_realization_general(theta).unwrap();
        let table = OperatorTable::from_realization(&real);
        let w: Vec<Gen> = w.into_iter().filter(|g| g.party == 2 || g.op < 2).collect();
        let m = canonicalize(&w);
        let raw: qcore::Mat2 = w.iter().filter(|g| g.party == 0).fold(qcore::identity2(), |acc, g| acc * table.mats[0][g.op as usize]);
        let canon = table.party_product(&m, 0).unwrap();
        prop_assert!((raw - canon).norm() < 1e-12);
        let direct = table.moment(&m, &real.state).unwrap();
        let adj = table.moment(&m.adjoint(), &real.state).unwrap();
        prop_assert!((direct - adj.conj()).norm() < 1e-12);
    }
}

#[test]
fn words_of_different_parties_commute() {
    let a = Gen::new(0, 1);
    let b = Gen::new(1, 0);
    assert_eq!(canonicalize(&[b, a]), canonicalize(&[a, b]));
    assert!(canonicalize(&[a, a]).is_identity());
    let aba = canonicalize(&[a, Gen::new(0, 0), a]);
    assert_eq!(aba.len(), 3);
    assert_eq!(aba.to_string(), "A1 A0 A1");
}

#[test]
fn poly_hermitian_part() {
    let m = Monomial::from_gens(&[Gen::new(0, 0), Gen::new(0, 1)]);
    let p = Poly::term(m.clone(), 1.0);
    assert!(!p.is_hermitian(1e-12));
    let h = p.hermitian_part();
    assert!(h.is_hermitian(1e-12));
    assert_eq!(h.coefficient(&m), 0.5);
    assert_eq!(h.coefficient(&m.adjoint()), 0.5);
    // Keyed polynomials merge a word with its adjoint.
    assert_eq!(p.keyed().coefficient(&m.key()), 1.0);
}

#[test]
fn q1_basis_sizes() {
    assert_eq!(q1_basis(&Scenario::general()).len(), 3 * 3 * 4);
    assert_eq!(q1_basis(&Scenario::result1()).len(), 5 * 5 * 5);
    assert!(q1_basis(&Scenario::general()).iter().all(|m| m.max_party_len() <= 1));
}

#[test]
fn augmented_basis_covers_targets() {
    let scenario = Scenario::general();
    let target = canonicalize(&[Gen::new(0, 0), Gen::new(0, 1), Gen::new(0, 0), Gen::new(1, 1)]);
    assert!(build_basis(&scenario, Level::Q1, std::slice::from_ref(&target)).is_err());
    let basis = build_basis(&scenario, Level::Q1Aug, std::slice::from_ref(&target)).unwrap();
    let covered = basis
        .iter()
        .any(|u| basis.iter().any(|v| u.adj_mul(v).key() == target.key()));
    assert!(covered);
    // Deterministic.
    assert_eq!(basis, build_basis(&scenario, Level::Q1Aug, &[target]).unwrap());
}

fn min_eig(m: nalgebra::DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m).eigenvalues.min()
}

#[test]
fn ideal_moments_are_feasible_for_general_problem() {
    for theta in [0.0, 0.3, 0.9, FRAC_PI_2] {
        let problem = npa::assemble_general_sdp(theta, 0.0, &GeneralConfig::default()).unwrap();
        let real = qcore::ideal_realization_general(theta).unwrap();
        let table = OperatorTable::from_realization(&real);
        let y = problem.moments_of(&table, &real.state).unwrap();
        assert!(problem.constraint_violation(&y) < 1e-10, "theta {theta}");
        for block in &problem.psd_blocks {
            assert!(min_eig(block.evaluate(&y)) > -1e-10, "{} at theta {theta}", block.name);
        }
        // The objective reproduces fidelity one.
        let f = problem.objective.evaluate(&y) + problem.objective_constant;
        assert!((f - 1.0).abs() < 1e-10, "theta {theta}: {f}");
    }
}

#[test]
fn white_noise_and_interval_models() {
    let cfg = GeneralConfig { noise: NoiseModel::Interval, ..GeneralConfig::default() };
    let interval = npa::assemble_general_sdp(0.4, 0.05, &cfg).unwrap();
    assert!(!interval.inequalities.is_empty());
    let white = npa::assemble_general_sdp(0.4, 0.05, &GeneralConfig::default()).unwrap();
    assert!(white.equalities.len() > interval.equalities.len());
    assert!(npa::assemble_general_sdp(0.4, 1.5, &cfg).is_err());
    assert!(npa::assemble_general_sdp(-0.4, 0.0, &cfg).is_err());
}

#[test]
fn result1_problem_shape() {
    let problem = npa::assemble_result1_sdp(0.0, &npa::Result1Config::default()).unwrap();
    assert_eq!(problem.num_localizing(), 6);
    let dim = problem.moment_matrix().dim();
    assert_eq!(dim, problem.basis.len());
    assert!(problem.equalities.iter().any(|c| c.label.contains("C1")));
}
