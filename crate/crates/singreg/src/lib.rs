//! Solvers and validation harness for regularized nonlinear operator
//! equations F(u) + eps (u - w) = 0 whose linearization A = F'(y) at the
//! root y is not boundedly invertible.
//!
//! The crate provides:
//!
//! * a small discrete Hilbert-space layer (grid domains, L2/H1/L4/L6 norms),
//! * nonlinear operator models with derivative access and empirical
//!   derivative-norm bounds, including the cubic Newtonian-potential
//!   integral operator on a 3D grid,
//! * contraction-based Picard solvers for the shifted equation, with a
//!   certified mode that enforces every precondition (admissibility, ball
//!   invariance window, contraction factor) and an exploratory mode that
//!   only logs them,
//! * a resolvent-constant estimator eps * ||(A + eps I)^{-1}||,
//! * independent brute-force oracles (bisection, dense Newton,
//!   refined-grid quadrature) for validation,
//! * experiment drivers for parameter sweeps with log-log rate fits and
//!   deterministic CSV output, used by the `singreg` binary.
//!
//! # Example
//!
//! Solve the certified 2D test family F(u) = diag(0,1) u + 0.5 (u1^2, u2^2)
//! at eps = 0.01 with an admissible shift, and confirm the solution scales
//! like eps:
//!
//! ```
//! use singreg::{
//!     choose_w, compute_theorem_constants, picard_solve_general, HilbertVector,
//!     MatrixQuadratic, Norm, RegularizationProblem, SolveOptions,
//! };
//!
//! let op = MatrixQuadratic::componentwise_square_2d(0.5); // analytic M2 = 1
//! let v = HilbertVector::from_abstract(vec![0.05, 0.1])?;
//! let w = choose_w(&op, &v, Some((1.0, 1.0)))?;
//!
//! let eps = 1e-2;
//! let constants = compute_theorem_constants(1.0, 1.0, 0.0, v.norm(Norm::L2)?, eps)?;
//! assert!(constants.q < 1.0);
//!
//! let problem = RegularizationProblem::new(&op, eps, w, Norm::L2)?;
//! let report = picard_solve_general(&problem, &constants, &SolveOptions::default())?;
//! assert!(report.converged && !report.exited_ball);
//! assert!((report.norm_solution - eps * 0.1).abs() < eps * 0.01);
//! # Ok::<(), singreg::Error>(())
//! ```

// indexed loops are the house style of the dense kernels, and `!(x > 0)`
// comparisons deliberately catch NaN
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod grid;
pub mod hilbert;
pub mod linalg;
pub mod operator;
pub mod oracle;
pub mod rate;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
pub use grid::GridDomain;
pub use hilbert::{HilbertVector, Norm, SpaceTag};
pub use operator::{
    estimate_derivative_bounds, taylor_remainder, MatrixQuadratic, NewtonianCubicOperator,
    OperatorModel, ScalarCubic,
};
pub use rate::{fit_rate, RateFit};
pub use solver::{
    choose_w, compute_theorem_constants, estimate_direct_constants, estimate_resolvent_constant,
    picard_solve_direct, picard_solve_general, shifted_solve, DirectConstants, Mode,
    RegularizationProblem, ResolventEstimate, SolveOptions, SolveReport, TheoremConstants,
};
