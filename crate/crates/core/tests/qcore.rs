use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use selftest_core::qcore::{self, Behavior, Slot, StateVector};
use selftest_core::Error;

#[test]
fn target_state_endpoints() {
    let w = qcore::make_target_state(0.0).unwrap();
    for i in [1, 2, 4] {
        assert_abs_diff_eq!(w.amplitude(i).re, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
    }
    let ghz = qcore::make_target_state(FRAC_PI_2).unwrap();
    assert_abs_diff_eq!(ghz.amplitude(0).re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
    assert_abs_diff_eq!(ghz.amplitude(7).re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
    assert!(qcore::make_target_state(-0.1).is_err());
    assert!(qcore::make_target_state(2.0).is_err());
}

#[test]
fn zzz_at_w_state_is_minus_one() {
    let real = qcore::ideal_realization_general(0.0).unwrap();
    assert_abs_diff_eq!(qcore::correlator(&real, [Some(0), Some(0), Some(0)]).unwrap(), -1.0, epsilon = 1e-12);
}

#[test]
fn zzx_at_pi_over_4() {
    let stats = qcore::closed_form_statistics(FRAC_PI_4);
    let zzx = stats.iter().find(|s| s.label == "ZZX").unwrap();
    assert_abs_diff_eq!(zzx.value, 1.0 / 6f64.sqrt(), epsilon = 1e-15);
}

#[test]
fn xxx_at_ghz_is_one() {
    let real = qcore::ideal_realization_general(FRAC_PI_2).unwrap();
    assert_abs_diff_eq!(qcore::correlator(&real, [Some(1), Some(1), Some(1)]).unwrap(), 1.0, epsilon = 1e-12);
}

#[test]
fn state_vector_rejects_bad_input() {
    let c = |v: f64| qcore::C64::new(v, 0.0);
    assert!(matches!(StateVector::new(vec![c(1.0), c(1.0)]), Err(Error::NotPhysical { .. })));
    assert!(StateVector::new(vec![c(1.0), c(0.0), c(0.0)]).is_err());
    assert!(StateVector::from_real(&[0.0, 0.0]).is_err());
    // from_real normalizes.
    let s = StateVector::from_real(&[3.0, 4.0]).unwrap();
    assert_abs_diff_eq!(s.amplitude(1).re, 0.8, epsilon = 1e-15);
}

#[test]
fn behavior_validation() {
    // Uniform noise is a valid behavior; a signaling one is not.
    let n = 2 * 2 * 2 * 8;
    assert!(Behavior::new([2, 2, 2], vec![1.0 / 8.0; n]).is_ok());
    let mut p = vec![0.0; n];
    // Alice's outcome copies Bob's input.
    let b = Behavior::new([2, 2, 2], vec![1.0 / 8.0; n]).unwrap();
    for x in b.input_triples() {
        let a = [x[1], 0, 0];
        p[b.index(x, a)] = 1.0;
    }
    assert!(Behavior::new([2, 2, 2], p).is_err());
    assert!(Behavior::new([2, 2, 2], vec![0.5; n]).is_err());
}

#[test]
fn result1_projector_statistics() {
    let real = qcore::ideal_realization_result1().unwrap();
    let b = qcore::behavior_full(&real);
    use Slot::{P0, P1};
    for pat in [[P0, P0, P0], [P0, P0, P1], [P0, P1, P0], [P1, P0, P0], [P1, P1, P1]] {
        assert_abs_diff_eq!(b.projector_correlator(pat).unwrap(), 0.2, epsilon = 1e-12);
    }
    for pat in [[P0, P1, P1], [P1, P0, P1], [P1, P1, P0]] {
        assert_abs_diff_eq!(b.projector_correlator(pat).unwrap(), 0.0, epsilon = 1e-12);
    }
}

proptest! {
    #[test]
    fn closed_forms_match_simulation(theta in 0.0..FRAC_PI_2) {
        let real = qcore::ideal_realization_general(theta).unwrap();
        for s in qcore::closed_form_statistics(theta) {
            let sim = qcore::correlator(&real, s.choice).unwrap();
            prop_assert!((sim - s.value).abs() < 1e-10, "{} at {theta}: {sim} vs {}", s.label, s.value);
        }
    }

    #[test]
    fn simulated_behavior_is_no_signaling(theta in 0.0..FRAC_PI_2) {
        let real = qcore::ideal_realization_general(theta).unwrap();
        let b = qcore::behavior_full(&real);
        // Behavior::new re-validates normalization and no-signaling.
        prop_assert!(Behavior::new(b.inputs(), b.probabilities().to_vec()).is_ok());
        // Correlators from the table agree with the operator expectation.
        let c = b.correlator([Some(1), None, Some(2)]).unwrap();
        let d = qcore::correlator(&real, [Some(1), None, Some(2)]).unwrap();
        prop_assert!((c - d).abs() < 1e-12);
    }
}
