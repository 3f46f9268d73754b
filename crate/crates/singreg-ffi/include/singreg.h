/* C interface to the singreg solvers. */

#pragma once

/* Generated with cbindgen:0.29.4 */

/* This file is generated by cbindgen from crates/singreg-ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every FFI entry point.
typedef enum {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_POINTER = 1,
  SR_STATUS_INVALID_ARGUMENT = 2,
  SR_STATUS_SHAPE_MISMATCH = 3,
  SR_STATUS_ADMISSIBILITY = 4,
  SR_STATUS_PRECONDITION = 5,
  SR_STATUS_BALL_EXIT = 6,
  SR_STATUS_LINEAR_SOLVE_FAILED = 7,
  SR_STATUS_ORACLE_FAILED = 8,
  SR_STATUS_NO_FIT = 9,
  SR_STATUS_CONFIG_ERROR = 10,
} SrStatus;

// Solver mode.
typedef enum {
  SR_MODE_CERTIFIED = 0,
  SR_MODE_EXPLORATORY = 1,
} SrMode;

// Opaque operator handle.
typedef struct SrOperator SrOperator;

// Contraction constants (see `sr_theorem_constants`).
typedef struct {
  double c;
  double m2;
  double m3;
  double v_norm;
  double epsilon;
  double rho;
  double r_min;
  double r_max;
  double q;
  double epsilon_max;
} SrTheoremConstants;

// Scalar summary of one solve.
typedef struct {
  double norm_solution;
  double final_residual;
  double max_step_ratio;
  double ball_radius;
  uintptr_t iterations;
  bool converged;
  bool exited_ball;
  bool certified_run;
} SrSolveSummary;

// Log-log least-squares fit result.
typedef struct {
  double slope;
  double intercept;
  double r_squared;
  uintptr_t points_used;
} SrRateFit;

// Create the cubic Newtonian-potential operator on a uniform grid over an
// axis-aligned box. `lower`, `edges` point at 3 doubles; `points` at 3
// per-axis node counts (each >= 2).
SrStatus sr_operator_newtonian_cubic(const double *lower,
                                     const double *edges,
                                     const uintptr_t *points,
                                     SrOperator **out);

// Create the scalar cubic operator F(u) = u^3.
SrStatus sr_operator_scalar_cubic(SrOperator **out);

// Create F(u) = A u + B(u, u) from a row-major `dim x dim` matrix and a
// dense `dim^3` tensor (index order i*dim*dim + j*dim + k). Pass
// `analytic_m2 < 0` when no analytic bound is available.
SrStatus sr_operator_matrix_quadratic(uintptr_t dim,
                                      const double *matrix,
                                      const double *quadratic,
                                      double analytic_m2,
                                      bool symmetric_psd,
                                      SrOperator **out);

// Dimension of the operator's coefficient space.
uintptr_t sr_operator_dim(const SrOperator *op);

// Release an operator handle. Passing null is a no-op.
void sr_operator_free(SrOperator *op);

// Evaluate the contraction constants; fails when the admissibility product
// 2 M2 ||v|| c (1+c) reaches 1.
SrStatus sr_theorem_constants(double c,
                              double m2,
                              double m3,
                              double v_norm,
                              double epsilon,
                              SrTheoremConstants *out);

// Direct Picard solve u <- -(1/eps) F(u) + eps h for operators with a
// vanishing linearization at the root. `h` points at `sr_operator_dim(op)`
// doubles and is normalized on entry; `solution_out` may be null or a
// buffer of the same length.
SrStatus sr_solve_direct(const SrOperator *op,
                         double epsilon,
                         const double *h,
                         SrMode mode,
                         uint64_t seed,
                         SrSolveSummary *summary,
                         double *solution_out);

// General Picard solve of F(u) + eps (u - w) = 0 through the shifted
// resolvent, with user-supplied constants (resolvent c, bounds M2/M3, and
// ||v|| of the admissible shift direction).
SrStatus sr_solve_general(const SrOperator *op,
                          double epsilon,
                          const double *w,
                          double c,
                          double m2,
                          double m3,
                          double v_norm,
                          SrMode mode,
                          uint64_t seed,
                          SrSolveSummary *summary,
                          double *solution_out);

// Construct the admissible shift w = y - F'(y) v into `w_out` (both arrays
// of length `sr_operator_dim(op)`).
SrStatus sr_choose_w(const SrOperator *op, const double *v, double *w_out);

// Lower-bound estimate of sup_eps eps * ||(F'(y) + eps I)^{-1}|| over a
// caller-supplied epsilon grid. `low_confidence` is set when the power
// iteration failed to settle.
SrStatus sr_resolvent_constant(const SrOperator *op,
                               const double *epsilons,
                               uintptr_t len,
                               double *c_out,
                               bool *low_confidence_out);

// Ordinary least squares of log(value) against log(epsilon); needs at
// least 3 strictly positive values.
SrStatus sr_fit_rate(const double *epsilons, const double *values, uintptr_t len, SrRateFit *out);

// Copy the current thread's last error message (UTF-8, NUL-terminated) into
// `buf` and return the full message length in bytes (excluding the NUL).
// Call with a null `buf` to query the needed capacity.
uintptr_t sr_last_error_message(char *buf, uintptr_t cap);

// Render a double with 17 significant digits, matching the CLI's CSV
// convention. Returns the rendered length like `sr_last_error_message`.
uintptr_t sr_format_f64(double value, char *buf, uintptr_t cap);
