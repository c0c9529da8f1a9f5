use std::ffi::{CStr, CString};
use std::ptr;

use selftest_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let n = unsafe { st_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    assert!(n > 0);
    CStr::from_bytes_until_nul(&buf).unwrap().to_string_lossy().into_owned()
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(st_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn closed_form_statistics() {
    let mut out = [0.0; ST_NUM_CLOSED_FORM];
    let st = unsafe { st_closed_form_statistics(0.0, out.as_mut_ptr(), out.len()) };
    assert_eq!(st, StStatus::Ok);
    assert!((out[0] + 1.0).abs() < 1e-12);
    let st = unsafe { st_closed_form_statistics(0.0, out.as_mut_ptr(), 3) };
    assert_eq!(st, StStatus::InvalidArgument);
    let st = unsafe { st_closed_form_statistics(5.0, out.as_mut_ptr(), out.len()) };
    assert_eq!(st, StStatus::InvalidArgument);
    assert!(last_error().contains("theta"));
}

#[test]
fn realization_round_trip() {
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(st_realization_general_new(std::f64::consts::FRAC_PI_2, &mut r), StStatus::Ok);
        let mut v = 0.0;
        assert_eq!(st_realization_correlator(r, 1, 1, 1, &mut v), StStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(st_realization_correlator(r, 1, -1, 9, &mut v), StStatus::InvalidArgument);
        assert_eq!(st_realization_swap_fidelity(r, std::f64::consts::FRAC_PI_2, &mut v), StStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);
        st_realization_free(r);

        assert_eq!(st_realization_result1_new(&mut r), StStatus::Ok);
        assert_eq!(st_realization_correlator(r, 0, 0, 0, &mut v), StStatus::Ok);
        st_realization_free(r);
        st_realization_free(ptr::null_mut());
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        assert_eq!(st_realization_general_new(0.3, ptr::null_mut()), StStatus::NullPointer);
        let mut v = 0.0;
        assert_eq!(st_realization_swap_fidelity(ptr::null(), 0.3, &mut v), StStatus::NullPointer);
        assert_eq!(st_problem_basis_size(ptr::null(), ptr::null_mut()), StStatus::NullPointer);
    }
}

#[test]
fn result1_check() {
    let (mut passed, mut worst) = (0i32, f64::NAN);
    assert_eq!(unsafe { st_check_result1(1e-9, &mut passed, &mut worst) }, StStatus::Ok);
    assert_eq!(passed, 1);
    assert!(worst < 1e-9);
}

#[test]
fn solve_and_export() {
    unsafe {
        let mut p = ptr::null_mut();
        let st = st_problem_general_new(0.5, 0.0, StLevel::Q1Aug, StNoiseModel::Default, &mut p);
        assert_eq!(st, StStatus::Ok);
        let mut n = 0usize;
        assert_eq!(st_problem_basis_size(p, &mut n), StStatus::Ok);
        assert!(n >= 36);

        let dir = tempfile_dir();
        let path = CString::new(dir.join("p.dat-s").to_str().unwrap()).unwrap();
        assert_eq!(st_problem_export_sdpa(p, path.as_ptr()), StStatus::Ok);
        assert!(dir.join("p.dat-s").exists());
        let bad = CString::new(dir.join("missing/p.dat-s").to_str().unwrap()).unwrap();
        assert_eq!(st_problem_export_sdpa(p, bad.as_ptr()), StStatus::Io);

        let mut s = ptr::null_mut();
        assert_eq!(st_problem_solve(p, StBackend::Clarabel, &mut s), StStatus::Ok);
        let mut status = StSolveStatus::SolverError;
        assert_eq!(st_solution_status(s, &mut status), StStatus::Ok);
        assert!(matches!(status, StSolveStatus::Optimal | StSolveStatus::NearOptimal));
        let mut primal = 0.0;
        assert_eq!(st_solution_values(s, &mut primal, ptr::null_mut(), ptr::null_mut()), StStatus::Ok);
        let mut lb = 0.0;
        assert_eq!(st_solution_lower_bound(s, &mut lb), StStatus::Ok);
        assert!(lb > 0.9996 && lb <= primal + 1e-6, "{lb} {primal}");
        st_solution_free(s);
        st_problem_free(p);
        std::fs::remove_dir_all(dir).unwrap();
    }
}

#[test]
fn invalid_problem_parameters() {
    let mut p = ptr::null_mut();
    let st = unsafe { st_problem_general_new(0.5, 2.0, StLevel::Q1, StNoiseModel::Interval, &mut p) };
    assert_eq!(st, StStatus::InvalidArgument);
    assert!(p.is_null());
    assert!(last_error().contains("epsilon"));
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("selftest-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
