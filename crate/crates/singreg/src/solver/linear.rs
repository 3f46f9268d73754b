//! Shifted linear solves x = (A + eps I)^{-1} b with A = F'(at), and the
//! power-iteration estimate of the resolvent constant
//! c = sup_eps eps * ||(A + eps I)^{-1}||.

use crate::error::{Error, Result};
use crate::hilbert::HilbertVector;
use crate::linalg::{self, DenseMatrix, LuFactors};
use crate::operator::{materialize_linearization, OperatorModel};

/// Default relative tolerance of the shifted solves.
pub const LINEAR_TOLERANCE: f64 = 1e-12;

/// Reusable solver for (A + eps I) x = b at a fixed linearization point.
/// Symmetric PSD operators go through conjugate gradients (matrix-free);
/// everything else through a dense LU of the materialized operator.
pub enum ShiftedSolver<'a> {
    Cg {
        op: &'a dyn OperatorModel,
        at: HilbertVector,
        eps: f64,
        tol: f64,
    },
    Lu {
        factors: LuFactors,
        shifted: DenseMatrix,
        space: crate::hilbert::SpaceTag,
        tol: f64,
    },
}

impl<'a> ShiftedSolver<'a> {
    pub fn new(op: &'a dyn OperatorModel, eps: f64, at: &HilbertVector, tol: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidInput(format!(
                "shift must be positive, got {eps}"
            )));
        }
        if op.linearization_is_psd() {
            Ok(ShiftedSolver::Cg {
                op,
                at: at.clone(),
                eps,
                tol,
            })
        } else {
            let a = materialize_linearization(op, at)?;
            let shifted = a.shifted(eps);
            let factors = shifted.lu()?;
            Ok(ShiftedSolver::Lu {
                factors,
                shifted,
                space: op.space(),
                tol,
            })
        }
    }

    /// Solve for one right-hand side; the returned x satisfies
    /// ||(A + eps I) x - b|| <= tol * ||b||.
    pub fn solve(&self, b: &HilbertVector) -> Result<HilbertVector> {
        match self {
            ShiftedSolver::Cg { op, at, eps, tol } => {
                let apply = |x: &[f64]| -> Vec<f64> {
                    let xv =
                        HilbertVector::new(op.space(), x.to_vec()).expect("iterate stays finite");
                    let mut out = op
                        .derivative_apply(at, &xv)
                        .expect("dimension fixed by construction")
                        .into_coeffs();
                    for (o, xi) in out.iter_mut().zip(x) {
                        *o += eps * xi;
                    }
                    out
                };
                let n = b.dim();
                let x = linalg::conjugate_gradient(apply, b.coeffs(), *tol, 40 * n.max(8))?;
                HilbertVector::new(op.space(), x)
            }
            ShiftedSolver::Lu {
                factors,
                shifted,
                space,
                tol,
            } => {
                let mut x = factors.solve(b.coeffs());
                // one step of iterative refinement guards the tolerance when
                // the shift makes the system ill conditioned
                let b_norm = linalg::norm2(b.coeffs());
                let mut residual = residual_vec(shifted, &x, b.coeffs());
                if linalg::norm2(&residual) > 0.1 * tol * b_norm {
                    let dx = factors.solve(&residual);
                    for (xi, di) in x.iter_mut().zip(&dx) {
                        *xi += di;
                    }
                    residual = residual_vec(shifted, &x, b.coeffs());
                }
                let achieved = linalg::norm2(&residual);
                if b_norm > 0.0 && achieved > tol * b_norm {
                    return Err(Error::LinearSolve {
                        achieved,
                        tolerance: tol * b_norm,
                        iterations: 1,
                    });
                }
                HilbertVector::new(*space, x)
            }
        }
    }
}

fn residual_vec(a: &DenseMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.matvec(x).iter().zip(b).map(|(ax, b)| b - ax).collect()
}

/// One-shot shifted solve (A = F'(at)).
pub fn shifted_solve(
    op: &dyn OperatorModel,
    eps: f64,
    b: &HilbertVector,
    at: &HilbertVector,
) -> Result<HilbertVector> {
    ShiftedSolver::new(op, eps, at, LINEAR_TOLERANCE)?.solve(b)
}

/// Power-iteration estimate of eps * ||(A + eps I)^{-1}|| maximized over a
/// parameter grid. The operator norm is the largest singular value of the
/// resolvent, obtained by iterating x <- (A+eps)^{-T} (A+eps)^{-1} x.
///
/// Power iteration only ever underestimates the norm, so the result is a
/// lower bound for the true constant and is reported as such.
#[derive(Debug, Clone)]
pub struct ResolventEstimate {
    /// max over the grid of eps * ||(A + eps I)^{-1}|| (lower bound).
    pub c_lower_bound: f64,
    /// True when the power iteration failed to settle on some grid point.
    pub low_confidence: bool,
    /// Per-epsilon values, in the order of the input grid.
    pub per_epsilon: Vec<(f64, f64)>,
}

pub fn estimate_resolvent_constant(
    op: &dyn OperatorModel,
    eps_grid: &[f64],
    max_power_iterations: usize,
) -> Result<ResolventEstimate> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidInput("epsilon grid must be nonempty".into()));
    }
    if let Some(bad) = eps_grid.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "epsilon grid entries must be positive, got {bad}"
        )));
    }
    let a = materialize_linearization(op, &op.base_point())?;
    let n = a.n();
    let mut per_epsilon = Vec::with_capacity(eps_grid.len());
    let mut low_confidence = false;
    let mut c_lower_bound: f64 = 0.0;
    for &eps in eps_grid {
        let factors = a.shifted(eps).lu()?;
        // deterministic start with energy on every coordinate
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 1e-3 * (i as f64 + 1.0) / n as f64)
            .collect();
        let nx = linalg::norm2(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let mut lambda_prev = f64::NAN;
        let mut converged = false;
        let mut lambda = 0.0;
        for it in 0..max_power_iterations {
            let z = factors.solve(&x);
            // Rayleigh quotient of M = R^T R at unit x is ||R x||^2 with
            // R = (A + eps I)^{-1}
            lambda = linalg::dot(&z, &z);
            let y = factors.solve_transposed(&z);
            let ny = linalg::norm2(&y);
            if ny == 0.0 || !ny.is_finite() {
                break;
            }
            x = y.iter().map(|v| v / ny).collect();
            if it >= 4 && (lambda - lambda_prev).abs() <= 1e-14 * lambda.max(1e-300) {
                converged = true;
                break;
            }
            lambda_prev = lambda;
        }
        if !converged {
            low_confidence = true;
            log::warn!(
                "power iteration did not settle for eps = {eps:.3e}; resolvent estimate is low-confidence"
            );
        }
        let value = eps * lambda.max(0.0).sqrt();
        c_lower_bound = c_lower_bound.max(value);
        per_epsilon.push((eps, value));
    }
    Ok(ResolventEstimate {
        c_lower_bound,
        low_confidence,
        per_epsilon,
    })
}

/// Default epsilon grid of the estimator: 8 points log-spaced over
/// [1e-4, 1e-1].
pub fn default_epsilon_grid() -> Vec<f64> {
    log_spaced(1e-4, 1e-1, 8)
}

/// Log-spaced grid from lo to hi inclusive, ascending.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let l0 = lo.ln();
    let l1 = hi.ln();
    (0..count)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
