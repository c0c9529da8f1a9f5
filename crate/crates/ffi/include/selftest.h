#ifndef SELFTEST_H
#define SELFTEST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Number of closed-form three-body statistics written by
 * [`st_closed_form_statistics`].
 */
#define ST_NUM_CLOSED_FORM 12

/**
 * Status codes. 0 is success; each error kind of the core library has its own code.
 */
typedef enum StStatus {
  ST_STATUS_OK = 0,
  ST_STATUS_INVALID_ARGUMENT = 1,
  ST_STATUS_NOT_PHYSICAL = 2,
  ST_STATUS_SCENARIO = 3,
  ST_STATUS_COVERAGE = 4,
  ST_STATUS_INCONSISTENT = 5,
  ST_STATUS_NO_CERTIFICATE = 6,
  ST_STATUS_SOLVER = 7,
  ST_STATUS_PARSE = 8,
  ST_STATUS_CONFIG = 9,
  ST_STATUS_IO = 10,
  ST_STATUS_INTERNAL = 11,
  ST_STATUS_NULL_POINTER = 12,
  ST_STATUS_PANIC = 13,
} StStatus;

typedef enum StLevel {
  ST_LEVEL_Q1 = 0,
  ST_LEVEL_Q1_AUG = 1,
} StLevel;

typedef enum StNoiseModel {
  /**
   * The problem's default.
   */
  ST_NOISE_MODEL_DEFAULT = 0,
  ST_NOISE_MODEL_WHITE_NOISE = 1,
  ST_NOISE_MODEL_INTERVAL = 2,
} StNoiseModel;

typedef enum StBackend {
  ST_BACKEND_CLARABEL = 0,
  /**
   * The bundled CVXOPT script through SDPA files.
   */
  ST_BACKEND_CVXOPT = 1,
} StBackend;

/**
 * Solver status of a finished solve.
 */
typedef enum StSolveStatus {
  ST_SOLVE_STATUS_OPTIMAL = 0,
  ST_SOLVE_STATUS_NEAR_OPTIMAL = 1,
  ST_SOLVE_STATUS_INFEASIBLE = 2,
  ST_SOLVE_STATUS_UNBOUNDED = 3,
  ST_SOLVE_STATUS_SOLVER_ERROR = 4,
} StSolveStatus;

/**
 * Assembled moment problem.
 */
typedef struct StProblem StProblem;

/**
 * State and observables of an ideal realization.
 */
typedef struct StRealization StRealization;

/**
 * Result of solving a problem.
 */
typedef struct StSolution StSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len` bytes) and returns the full message length.
 *
 * # Safety
 * `buf` must point to `len` writable bytes, or be null when `len` is 0.
 */
size_t st_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *st_version(void);

/**
 * Writes the 12 closed-form correlators at θ (order ZZZ, ZXX, XZX, XXZ, XZZ, ZXZ,
 * ZZX, XXX, ZZD, ZXD, XZD, XXD).
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum StStatus st_closed_form_statistics(double theta, double *out, size_t len);

/**
 * Ideal realization of cosθ|W⟩ + sinθ|GHZ⟩ (A, B: Z, X; C: Z, X, D).
 *
 * # Safety
 * `out` must be a valid pointer; the handle is released with [`st_realization_free`].
 */
enum StStatus st_realization_general_new(double theta, struct StRealization **out);

/**
 * The three-setting realization of the five-term state.
 *
 * # Safety
 * `out` must be a valid pointer; the handle is released with [`st_realization_free`].
 */
enum StStatus st_realization_result1_new(struct StRealization **out);

/**
 * # Safety
 * `r` must come from a `st_realization_*_new` call and not be used afterwards.
 */
void st_realization_free(struct StRealization *r);

/**
 * ⟨A_x B_y C_z⟩; pass a negative input to leave that party out.
 *
 * # Safety
 * `r` and `out` must be valid pointers.
 */
enum StStatus st_realization_correlator(const struct StRealization *r,
                                        int32_t x,
                                        int32_t y,
                                        int32_t z,
                                        double *out);

/**
 * Swap-isometry fidelity of the realization with cosθ|W⟩ + sinθ|GHZ⟩.
 *
 * # Safety
 * `r` and `out` must be valid pointers.
 */
enum StStatus st_realization_swap_fidelity(const struct StRealization *r,
                                           double theta,
                                           double *out);

/**
 * Checks the 24 Result 1 conditions on the ideal behavior. `passed` receives 1 or 0,
 * `worst_deviation` the largest |observed − required|.
 *
 * # Safety
 * Both out-pointers must be valid.
 */
enum StStatus st_check_result1(double tol, int32_t *passed, double *worst_deviation);

/**
 * Fidelity problem for cosθ|W⟩ + sinθ|GHZ⟩ with noise ε.
 *
 * # Safety
 * `out` must be valid; release the handle with [`st_problem_free`].
 */
enum StStatus st_problem_general_new(double theta,
                                     double epsilon,
                                     enum StLevel level,
                                     enum StNoiseModel noise_model,
                                     struct StProblem **out);

/**
 * Fidelity problem of the three-setting scenario with localizing matrices.
 *
 * # Safety
 * `out` must be valid; release the handle with [`st_problem_free`].
 */
enum StStatus st_problem_result1_new(double epsilon,
                                     enum StNoiseModel noise_model,
                                     struct StProblem **out);

/**
 * # Safety
 * `p` must come from a `st_problem_*_new` call and not be used afterwards.
 */
void st_problem_free(struct StProblem *p);

/**
 * Number of monomials in the moment matrix basis.
 *
 * # Safety
 * `p` and `out` must be valid pointers.
 */
enum StStatus st_problem_basis_size(const struct StProblem *p, size_t *out);

/**
 * Writes the reduced SDP to `path` in SDPA sparse format.
 *
 * # Safety
 * `p` must be valid and `path` a NUL-terminated UTF-8 string.
 */
enum StStatus st_problem_export_sdpa(const struct StProblem *p, const char *path);

/**
 * Solves the problem. Solver trouble is reported through the solution's status;
 * the return code is non-zero only when no solution object could be produced.
 *
 * # Safety
 * `p` and `out` must be valid; release the solution with [`st_solution_free`].
 */
enum StStatus st_problem_solve(const struct StProblem *p,
                               enum StBackend backend,
                               struct StSolution **out);

/**
 * # Safety
 * `s` must come from [`st_problem_solve`] and not be used afterwards.
 */
void st_solution_free(struct StSolution *s);

/**
 * # Safety
 * `s` and `out` must be valid pointers.
 */
enum StStatus st_solution_status(const struct StSolution *s, enum StSolveStatus *out);

/**
 * Primal value, dual value and their gap. Any out-pointer may be null.
 *
 * # Safety
 * `s` must be valid; non-null out-pointers must be writable.
 */
enum StStatus st_solution_values(const struct StSolution *s,
                                 double *primal,
                                 double *dual,
                                 double *gap);

/**
 * Certified lower bound (dual − gap tolerance); `NoCertificate` when the solve did
 * not produce one.
 *
 * # Safety
 * `s` and `out` must be valid pointers.
 */
enum StStatus st_solution_lower_bound(const struct StSolution *s, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SELFTEST_H */
