//! C ABI for `selftest-core`.
//!
//! Every function returns an [`StStatus`]; results come back through out-pointers.
//! Problems, solutions and realizations are opaque handles that the caller releases
//! with the matching `*_free` function. The message of the last failure on the
//! calling thread is available from [`st_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use selftest_core::analytic;
use selftest_core::npa::{self, GeneralConfig, Level, MomentProblem, NoiseModel, Result1Config};
use selftest_core::qcore::{self, Realization};
use selftest_core::sdp::{self, ClarabelBackend, ExternalBackend, SdpBackend, SdpSolution, SolveOptions, SolveStatus};
use selftest_core::{swapiso, Error};

/// Status codes. 0 is success; each error kind of the core library has its own code.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StStatus {
    Ok = 0,
    InvalidArgument = 1,
    NotPhysical = 2,
    Scenario = 3,
    Coverage = 4,
    Inconsistent = 5,
    NoCertificate = 6,
    Solver = 7,
    Parse = 8,
    Config = 9,
    Io = 10,
    Internal = 11,
    NullPointer = 12,
    Panic = 13,
}

/// Solver status of a finished solve.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StSolveStatus {
    Optimal = 0,
    NearOptimal = 1,
    Infeasible = 2,
    Unbounded = 3,
    SolverError = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StBackend {
    Clarabel = 0,
    /// The bundled CVXOPT script through SDPA files.
    Cvxopt = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StNoiseModel {
    /// The problem's default.
    Default = 0,
    WhiteNoise = 1,
    Interval = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StLevel {
    Q1 = 0,
    Q1Aug = 1,
}

/// Assembled moment problem.
pub struct StProblem {
    inner: MomentProblem,
}

/// Result of solving a problem.
pub struct StSolution {
    inner: SdpSolution,
}

/// State and observables of an ideal realization.
pub struct StRealization {
    inner: Realization,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn code_of(e: &Error) -> StStatus {
    match e {
        Error::InvalidArgument(_) => StStatus::InvalidArgument,
        Error::NotPhysical { .. } => StStatus::NotPhysical,
        Error::Scenario(_) => StStatus::Scenario,
        Error::Coverage(_) => StStatus::Coverage,
        Error::Inconsistent(_) => StStatus::Inconsistent,
        Error::NoCertificate(_) => StStatus::NoCertificate,
        Error::Solver(_) => StStatus::Solver,
        Error::Parse { .. } => StStatus::Parse,
        Error::Config(_) => StStatus::Config,
        Error::Io { .. } => StStatus::Io,
        Error::Internal(_) => StStatus::Internal,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), StStatus>) -> StStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            StStatus::Panic
        }
    }
}

fn fail(e: Error) -> StStatus {
    let code = code_of(&e);
    set_error(e.to_string());
    code
}

fn null(what: &str) -> StStatus {
    set_error(format!("{what} is null"));
    StStatus::NullPointer
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, StStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, StStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, StStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(Error::InvalidArgument(format!("{what} is not UTF-8"))))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null when `len` is 0.
#[no_mangle]
pub unsafe extern "C" fn st_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn st_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Number of closed-form three-body statistics written by
/// [`st_closed_form_statistics`].
pub const ST_NUM_CLOSED_FORM: usize = 12;

/// Writes the 12 closed-form correlators at θ (order ZZZ, ZXX, XZX, XXZ, XZZ, ZXZ,
/// ZZX, XXX, ZZD, ZXD, XZD, XXD).
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn st_closed_form_statistics(theta: f64, out: *mut f64, len: usize) -> StStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if len < ST_NUM_CLOSED_FORM {
            return Err(fail(Error::InvalidArgument(format!("buffer holds {len}, need {ST_NUM_CLOSED_FORM}"))));
        }
        qcore::check_theta(theta).map_err(fail)?;
        let s = qcore::closed_form_statistics(theta);
        for (i, st) in s.iter().enumerate() {
            *out.add(i) = st.value;
        }
        Ok(())
    })
}

/// Ideal realization of cosθ|W⟩ + sinθ|GHZ⟩ (A, B: Z, X; C: Z, X, D).
///
/// # Safety
/// `out` must be a valid pointer; the handle is released with [`st_realization_free`].
#[no_mangle]
pub unsafe extern "C" fn st_realization_general_new(theta: f64, out: *mut *mut StRealization) -> StStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = qcore::ideal_realization_general(theta).map_err(fail)?;
        *out = Box::into_raw(Box::new(StRealization { inner: r }));
        Ok(())
    })
}

/// The three-setting realization of the five-term state.
///
/// # Safety
/// `out` must be a valid pointer; the handle is released with [`st_realization_free`].
#[no_mangle]
pub unsafe extern "C" fn st_realization_result1_new(out: *mut *mut StRealization) -> StStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = qcore::ideal_realization_result1().map_err(fail)?;
        *out = Box::into_raw(Box::new(StRealization { inner: r }));
        Ok(())
    })
}

/// # Safety
/// `r` must come from a `st_realization_*_new` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn st_realization_free(r: *mut StRealization) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// ⟨A_x B_y C_z⟩; pass a negative input to leave that party out.
///
/// # Safety
/// `r` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn st_realization_correlator(
    r: *const StRealization,
    x: i32,
    y: i32,
    z: i32,
    out: *mut f64,
) -> StStatus {
    guard(|| {
        let r = in_ref(r, "realization")?;
        let out = out_ref(out, "out")?;
        let pick = |v: i32| (v >= 0).then_some(v as usize);
        *out = qcore::correlator(&r.inner, [pick(x), pick(y), pick(z)]).map_err(fail)?;
        Ok(())
    })
}

/// Swap-isometry fidelity of the realization with cosθ|W⟩ + sinθ|GHZ⟩.
///
/// # Safety
/// `r` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn st_realization_swap_fidelity(r: *const StRealization, theta: f64, out: *mut f64) -> StStatus {
    guard(|| {
        let r = in_ref(r, "realization")?;
        let out = out_ref(out, "out")?;
        *out = swapiso::fidelity(&r.inner, theta).map_err(fail)?;
        Ok(())
    })
}

/// Checks the 24 Result 1 conditions on the ideal behavior. `passed` receives 1 or 0,
/// `worst_deviation` the largest |observed − required|.
///
/// # Safety
/// Both out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn st_check_result1(tol: f64, passed: *mut i32, worst_deviation: *mut f64) -> StStatus {
    guard(|| {
        let passed = out_ref(passed, "passed")?;
        let worst = out_ref(worst_deviation, "worst_deviation")?;
        let real = qcore::ideal_realization_result1().map_err(fail)?;
        let report = analytic::result1_check(&qcore::behavior_full(&real), tol).map_err(fail)?;
        *passed = report.pass as i32;
        *worst = report.worst().map_or(0.0, |c| c.deviation);
        Ok(())
    })
}

fn noise(n: StNoiseModel) -> Option<NoiseModel> {
    match n {
        StNoiseModel::Default => None,
        StNoiseModel::WhiteNoise => Some(NoiseModel::WhiteNoise),
        StNoiseModel::Interval => Some(NoiseModel::Interval),
    }
}

/// Fidelity problem for cosθ|W⟩ + sinθ|GHZ⟩ with noise ε.
///
/// # Safety
/// `out` must be valid; release the handle with [`st_problem_free`].
#[no_mangle]
pub unsafe extern "C" fn st_problem_general_new(
    theta: f64,
    epsilon: f64,
    level: StLevel,
    noise_model: StNoiseModel,
    out: *mut *mut StProblem,
) -> StStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let mut cfg = GeneralConfig {
            level: match level {
                StLevel::Q1 => Level::Q1,
                StLevel::Q1Aug => Level::Q1Aug,
            },
            ..Default::default()
        };
        if let Some(n) = noise(noise_model) {
            cfg.noise = n;
        }
        let p = npa::assemble_general_sdp(theta, epsilon, &cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(StProblem { inner: p }));
        Ok(())
    })
}

/// Fidelity problem of the three-setting scenario with localizing matrices.
///
/// # Safety
/// `out` must be valid; release the handle with [`st_problem_free`].
#[no_mangle]
pub unsafe extern "C" fn st_problem_result1_new(
    epsilon: f64,
    noise_model: StNoiseModel,
    out: *mut *mut StProblem,
) -> StStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let mut cfg = Result1Config::default();
        if let Some(n) = noise(noise_model) {
            cfg.noise = n;
        }
        let p = npa::assemble_result1_sdp(epsilon, &cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(StProblem { inner: p }));
        Ok(())
    })
}

/// # Safety
/// `p` must come from a `st_problem_*_new` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn st_problem_free(p: *mut StProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of monomials in the moment matrix basis.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn st_problem_basis_size(p: *const StProblem, out: *mut usize) -> StStatus {
    guard(|| {
        *out_ref(out, "out")? = in_ref(p, "problem")?.inner.basis.len();
        Ok(())
    })
}

/// Writes the reduced SDP to `path` in SDPA sparse format.
///
/// # Safety
/// `p` must be valid and `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn st_problem_export_sdpa(p: *const StProblem, path: *const c_char) -> StStatus {
    guard(|| {
        let p = in_ref(p, "problem")?;
        let path = c_str(path, "path")?;
        let sf = sdp::to_standard_form(&p.inner, &sdp::ReduceOptions::default()).map_err(fail)?;
        sdp::write_sdpa_file(&sf.sdp, Path::new(path)).map_err(fail)?;
        Ok(())
    })
}

/// Solves the problem. Solver trouble is reported through the solution's status;
/// the return code is non-zero only when no solution object could be produced.
///
/// # Safety
/// `p` and `out` must be valid; release the solution with [`st_solution_free`].
#[no_mangle]
pub unsafe extern "C" fn st_problem_solve(p: *const StProblem, backend: StBackend, out: *mut *mut StSolution) -> StStatus {
    guard(|| {
        let p = in_ref(p, "problem")?;
        let out = out_ref(out, "out")?;
        let b: Box<dyn SdpBackend> = match backend {
            StBackend::Clarabel => Box::new(ClarabelBackend),
            StBackend::Cvxopt => Box::new(ExternalBackend::cvxopt()),
        };
        let s = sdp::solve(&p.inner, b.as_ref(), &SolveOptions::default()).map_err(fail)?;
        *out = Box::into_raw(Box::new(StSolution { inner: s }));
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`st_problem_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn st_solution_free(s: *mut StSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn st_solution_status(s: *const StSolution, out: *mut StSolveStatus) -> StStatus {
    guard(|| {
        let s = in_ref(s, "solution")?;
        *out_ref(out, "out")? = match s.inner.status {
            SolveStatus::Optimal => StSolveStatus::Optimal,
            SolveStatus::NearOptimal => StSolveStatus::NearOptimal,
            SolveStatus::Infeasible => StSolveStatus::Infeasible,
            SolveStatus::Unbounded => StSolveStatus::Unbounded,
            SolveStatus::SolverError => StSolveStatus::SolverError,
        };
        Ok(())
    })
}

/// Primal value, dual value and their gap. Any out-pointer may be null.
///
/// # Safety
/// `s` must be valid; non-null out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_solution_values(
    s: *const StSolution,
    primal: *mut f64,
    dual: *mut f64,
    gap: *mut f64,
) -> StStatus {
    guard(|| {
        let s = &in_ref(s, "solution")?.inner;
        for (p, v) in [(primal, s.primal_value), (dual, s.dual_value), (gap, s.gap)] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Certified lower bound (dual − gap tolerance); `NoCertificate` when the solve did
/// not produce one.
///
/// # Safety
/// `s` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn st_solution_lower_bound(s: *const StSolution, out: *mut f64) -> StStatus {
    guard(|| {
        let s = in_ref(s, "solution")?;
        *out_ref(out, "out")? = sdp::lower_bound_from_solution(&s.inner).map_err(fail)?;
        Ok(())
    })
}
