//! C ABI for the singreg solvers.
//!
//! Operators are opaque handles created by the `sr_operator_*` constructors
//! and released with `sr_operator_free`. Solves fill a plain-old-data
//! summary struct and, optionally, a caller-provided coefficient buffer of
//! length `sr_operator_dim(op)`. Every entry point returns an `SrStatus`;
//! on failure `sr_last_error_message` retrieves a human-readable diagnostic
//! for the current thread.
//!
//! Pointer contracts are uniform: array arguments must point at the stated
//! number of elements (usually `sr_operator_dim`), output structs must be
//! writable, and handles must come from the matching constructor.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::os::raw::c_char;

use singreg::error::Error;
use singreg::experiment::fmt_f64;
use singreg::{
    compute_theorem_constants, estimate_direct_constants, estimate_resolvent_constant, fit_rate,
    picard_solve_direct, picard_solve_general, GridDomain, HilbertVector, MatrixQuadratic, Mode,
    NewtonianCubicOperator, OperatorModel, RegularizationProblem, ScalarCubic, SolveOptions,
    SolveReport,
};

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(message: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message.into());
}

/// Status codes returned by every FFI entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    Admissibility = 4,
    Precondition = 5,
    BallExit = 6,
    LinearSolveFailed = 7,
    OracleFailed = 8,
    NoFit = 9,
    ConfigError = 10,
}

fn status_of(err: &Error) -> SrStatus {
    match err {
        Error::Shape(_) => SrStatus::ShapeMismatch,
        Error::NonFinite(_) | Error::InvalidInput(_) => SrStatus::InvalidArgument,
        Error::Admissibility { .. } => SrStatus::Admissibility,
        Error::Precondition(_) => SrStatus::Precondition,
        Error::BallExit { .. } => SrStatus::BallExit,
        Error::LinearSolve { .. } => SrStatus::LinearSolveFailed,
        Error::Bracket { .. } | Error::SingularJacobian { .. } | Error::Oracle(_) => {
            SrStatus::OracleFailed
        }
        Error::NoFit { .. } => SrStatus::NoFit,
        Error::Config(_) | Error::Io(_) => SrStatus::ConfigError,
    }
}

fn fail(err: Error) -> SrStatus {
    let status = status_of(&err);
    set_last_error(err.to_string());
    status
}

/// Solver mode.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrMode {
    Certified = 0,
    Exploratory = 1,
}

impl From<SrMode> for Mode {
    fn from(mode: SrMode) -> Mode {
        match mode {
            SrMode::Certified => Mode::Certified,
            SrMode::Exploratory => Mode::Exploratory,
        }
    }
}

/// Opaque operator handle.
pub struct SrOperator {
    inner: Box<dyn OperatorModel>,
}

/// Contraction constants (see `sr_theorem_constants`).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SrTheoremConstants {
    pub c: f64,
    pub m2: f64,
    pub m3: f64,
    pub v_norm: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub q: f64,
    pub epsilon_max: f64,
}

/// Scalar summary of one solve.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SrSolveSummary {
    pub norm_solution: f64,
    pub final_residual: f64,
    pub max_step_ratio: f64,
    pub ball_radius: f64,
    pub iterations: usize,
    pub converged: bool,
    pub exited_ball: bool,
    pub certified_run: bool,
}

/// Log-log least-squares fit result.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SrRateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

unsafe fn slice_arg<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

fn store_operator(op: Box<dyn OperatorModel>, out: *mut *mut SrOperator) -> SrStatus {
    if out.is_null() {
        set_last_error("output handle pointer is null");
        return SrStatus::NullPointer;
    }
    let handle = Box::new(SrOperator { inner: op });
    unsafe { *out = Box::into_raw(handle) };
    SrStatus::Ok
}

/// Create the cubic Newtonian-potential operator on a uniform grid over an
/// axis-aligned box. `lower`, `edges` point at 3 doubles; `points` at 3
/// per-axis node counts (each >= 2).
#[no_mangle]
pub unsafe extern "C" fn sr_operator_newtonian_cubic(
    lower: *const f64,
    edges: *const f64,
    points: *const usize,
    out: *mut *mut SrOperator,
) -> SrStatus {
    let (Some(lower), Some(edges), Some(points)) = (
        slice_arg(lower, 3),
        slice_arg(edges, 3),
        slice_arg(points, 3),
    ) else {
        set_last_error("null grid description");
        return SrStatus::NullPointer;
    };
    let domain = match GridDomain::new(
        [lower[0], lower[1], lower[2]],
        [edges[0], edges[1], edges[2]],
        [points[0], points[1], points[2]],
    ) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    match NewtonianCubicOperator::new(domain) {
        Ok(op) => store_operator(Box::new(op), out),
        Err(e) => fail(e),
    }
}

/// Create the scalar cubic operator F(u) = u^3.
#[no_mangle]
pub unsafe extern "C" fn sr_operator_scalar_cubic(out: *mut *mut SrOperator) -> SrStatus {
    store_operator(Box::new(ScalarCubic::new()), out)
}

/// Create F(u) = A u + B(u, u) from a row-major `dim x dim` matrix and a
/// dense `dim^3` tensor (index order i*dim*dim + j*dim + k). Pass
/// `analytic_m2 < 0` when no analytic bound is available.
#[no_mangle]
pub unsafe extern "C" fn sr_operator_matrix_quadratic(
    dim: usize,
    matrix: *const f64,
    quadratic: *const f64,
    analytic_m2: f64,
    symmetric_psd: bool,
    out: *mut *mut SrOperator,
) -> SrStatus {
    if dim == 0 {
        set_last_error("dimension must be positive");
        return SrStatus::InvalidArgument;
    }
    let (Some(matrix), Some(quadratic)) = (
        slice_arg(matrix, dim * dim),
        slice_arg(quadratic, dim * dim * dim),
    ) else {
        set_last_error("null matrix or tensor");
        return SrStatus::NullPointer;
    };
    let rows: Vec<Vec<f64>> = matrix.chunks(dim).map(|r| r.to_vec()).collect();
    let a = match singreg::linalg::DenseMatrix::from_rows(&rows) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    let m2 = if analytic_m2 >= 0.0 {
        Some(analytic_m2)
    } else {
        None
    };
    match MatrixQuadratic::new(a, quadratic.to_vec(), m2, symmetric_psd) {
        Ok(op) => store_operator(Box::new(op), out),
        Err(e) => fail(e),
    }
}

/// Dimension of the operator's coefficient space.
#[no_mangle]
pub unsafe extern "C" fn sr_operator_dim(op: *const SrOperator) -> usize {
    if op.is_null() {
        return 0;
    }
    (*op).inner.dim()
}

/// Release an operator handle. Passing null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn sr_operator_free(op: *mut SrOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Evaluate the contraction constants; fails when the admissibility product
/// 2 M2 ||v|| c (1+c) reaches 1.
#[no_mangle]
pub unsafe extern "C" fn sr_theorem_constants(
    c: f64,
    m2: f64,
    m3: f64,
    v_norm: f64,
    epsilon: f64,
    out: *mut SrTheoremConstants,
) -> SrStatus {
    if out.is_null() {
        set_last_error("output pointer is null");
        return SrStatus::NullPointer;
    }
    match compute_theorem_constants(c, m2, m3, v_norm, epsilon) {
        Ok(k) => {
            *out = SrTheoremConstants {
                c: k.c,
                m2: k.m2,
                m3: k.m3,
                v_norm: k.v_norm,
                epsilon: k.epsilon,
                rho: k.rho,
                r_min: k.r_min,
                r_max: k.r_max,
                q: k.q,
                epsilon_max: k.epsilon_max,
            };
            SrStatus::Ok
        }
        Err(e) => fail(e),
    }
}

fn write_report(
    report: &SolveReport,
    summary: *mut SrSolveSummary,
    solution_out: *mut f64,
) -> SrStatus {
    if summary.is_null() {
        set_last_error("summary pointer is null");
        return SrStatus::NullPointer;
    }
    unsafe {
        *summary = SrSolveSummary {
            norm_solution: report.norm_solution,
            final_residual: report.final_residual,
            max_step_ratio: report.contraction_estimate,
            ball_radius: report.ball_radius,
            iterations: report.iterations,
            converged: report.converged,
            exited_ball: report.exited_ball,
            certified_run: report.certified_run,
        };
        if !solution_out.is_null() {
            let coeffs = report.solution.coeffs();
            std::ptr::copy_nonoverlapping(coeffs.as_ptr(), solution_out, coeffs.len());
        }
    }
    SrStatus::Ok
}

/// Direct Picard solve u <- -(1/eps) F(u) + eps h for operators with a
/// vanishing linearization at the root. `h` points at `sr_operator_dim(op)`
/// doubles and is normalized on entry; `solution_out` may be null or a
/// buffer of the same length.
#[no_mangle]
pub unsafe extern "C" fn sr_solve_direct(
    op: *const SrOperator,
    epsilon: f64,
    h: *const f64,
    mode: SrMode,
    seed: u64,
    summary: *mut SrSolveSummary,
    solution_out: *mut f64,
) -> SrStatus {
    if op.is_null() {
        set_last_error("operator handle is null");
        return SrStatus::NullPointer;
    }
    let inner = (*op).inner.as_ref();
    let Some(h) = slice_arg(h, inner.dim()) else {
        set_last_error("h pointer is null");
        return SrStatus::NullPointer;
    };
    let h = match HilbertVector::new(inner.space(), h.to_vec()) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let constants = match estimate_direct_constants(inner, 12, seed) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let options = SolveOptions {
        mode: mode.into(),
        seed,
        direct_constants: Some(constants),
        ..Default::default()
    };
    match picard_solve_direct(inner, epsilon, &h, &options) {
        Ok(report) => write_report(&report, summary, solution_out),
        Err(e) => fail(e),
    }
}

/// General Picard solve of F(u) + eps (u - w) = 0 through the shifted
/// resolvent, with user-supplied constants (resolvent c, bounds M2/M3, and
/// ||v|| of the admissible shift direction).
#[no_mangle]
pub unsafe extern "C" fn sr_solve_general(
    op: *const SrOperator,
    epsilon: f64,
    w: *const f64,
    c: f64,
    m2: f64,
    m3: f64,
    v_norm: f64,
    mode: SrMode,
    seed: u64,
    summary: *mut SrSolveSummary,
    solution_out: *mut f64,
) -> SrStatus {
    if op.is_null() {
        set_last_error("operator handle is null");
        return SrStatus::NullPointer;
    }
    let inner = (*op).inner.as_ref();
    let Some(w) = slice_arg(w, inner.dim()) else {
        set_last_error("w pointer is null");
        return SrStatus::NullPointer;
    };
    let w = match HilbertVector::new(inner.space(), w.to_vec()) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let constants = match compute_theorem_constants(c, m2, m3, v_norm, epsilon) {
        Ok(k) => k,
        Err(e) => return fail(e),
    };
    let problem = match RegularizationProblem::new(inner, epsilon, w, inner.natural_norm()) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let options = SolveOptions {
        mode: mode.into(),
        seed,
        ..Default::default()
    };
    match picard_solve_general(&problem, &constants, &options) {
        Ok(report) => write_report(&report, summary, solution_out),
        Err(e) => fail(e),
    }
}

/// Construct the admissible shift w = y - F'(y) v into `w_out` (both arrays
/// of length `sr_operator_dim(op)`).
#[no_mangle]
pub unsafe extern "C" fn sr_choose_w(
    op: *const SrOperator,
    v: *const f64,
    w_out: *mut f64,
) -> SrStatus {
    if op.is_null() || w_out.is_null() {
        set_last_error("null pointer argument");
        return SrStatus::NullPointer;
    }
    let inner = (*op).inner.as_ref();
    let Some(v) = slice_arg(v, inner.dim()) else {
        set_last_error("v pointer is null");
        return SrStatus::NullPointer;
    };
    let v = match HilbertVector::new(inner.space(), v.to_vec()) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    match singreg::choose_w(inner, &v, None) {
        Ok(w) => {
            std::ptr::copy_nonoverlapping(w.coeffs().as_ptr(), w_out, w.coeffs().len());
            SrStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Lower-bound estimate of sup_eps eps * ||(F'(y) + eps I)^{-1}|| over a
/// caller-supplied epsilon grid. `low_confidence` is set when the power
/// iteration failed to settle.
#[no_mangle]
pub unsafe extern "C" fn sr_resolvent_constant(
    op: *const SrOperator,
    epsilons: *const f64,
    len: usize,
    c_out: *mut f64,
    low_confidence_out: *mut bool,
) -> SrStatus {
    if op.is_null() || c_out.is_null() || low_confidence_out.is_null() {
        set_last_error("null pointer argument");
        return SrStatus::NullPointer;
    }
    let Some(eps) = slice_arg(epsilons, len) else {
        set_last_error("epsilon grid pointer is null");
        return SrStatus::NullPointer;
    };
    match estimate_resolvent_constant((*op).inner.as_ref(), eps, 500) {
        Ok(est) => {
            *c_out = est.c_lower_bound;
            *low_confidence_out = est.low_confidence;
            SrStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Ordinary least squares of log(value) against log(epsilon); needs at
/// least 3 strictly positive values.
#[no_mangle]
pub unsafe extern "C" fn sr_fit_rate(
    epsilons: *const f64,
    values: *const f64,
    len: usize,
    out: *mut SrRateFit,
) -> SrStatus {
    if out.is_null() {
        set_last_error("output pointer is null");
        return SrStatus::NullPointer;
    }
    let (Some(eps), Some(vals)) = (slice_arg(epsilons, len), slice_arg(values, len)) else {
        set_last_error("null data pointer");
        return SrStatus::NullPointer;
    };
    let pairs: Vec<(f64, f64)> = eps.iter().copied().zip(vals.iter().copied()).collect();
    match fit_rate(&pairs) {
        Ok(fit) => {
            *out = SrRateFit {
                slope: fit.slope,
                intercept: fit.intercept,
                r_squared: fit.r_squared,
                points_used: fit.points_used,
            };
            SrStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Copy the current thread's last error message (UTF-8, NUL-terminated) into
/// `buf` and return the full message length in bytes (excluding the NUL).
/// Call with a null `buf` to query the needed capacity.
#[no_mangle]
pub unsafe extern "C" fn sr_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Render a double with 17 significant digits, matching the CLI's CSV
/// convention. Returns the rendered length like `sr_last_error_message`.
#[no_mangle]
pub unsafe extern "C" fn sr_format_f64(value: f64, buf: *mut c_char, cap: usize) -> usize {
    let rendered = fmt_f64(value);
    let bytes = rendered.as_bytes();
    if !buf.is_null() && cap > 0 {
        let n = bytes.len().min(cap - 1);
        std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
        *buf.add(n) = 0;
    }
    bytes.len()
}
