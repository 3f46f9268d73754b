//! Picard fixed-point solvers for the regularized equation
//! F(u) + eps (u - w) = 0 near a root y of F.
//!
//! Two forms are implemented. The general form iterates
//!   z_{k+1} = -(A + eps I)^{-1} K(z_k) - eps (A + eps I)^{-1} (y - w)
//! with A = F'(y) and K the Taylor remainder, working on the ball of radius
//! R_min from the constants window. The direct form applies when the
//! linearization at the root vanishes (the Newtonian cubic instance and its
//! scalar analogue): with w = eps*h it iterates
//!   u_{k+1} = -(1/eps) F(u_k) + eps h
//! on the ball of radius eps^(2/3).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{HilbertVector, Norm};
use crate::operator::{OperatorModel, ROOT_TOLERANCE};
use crate::sampling;

use super::constants::TheoremConstants;
use super::linear::{ShiftedSolver, LINEAR_TOLERANCE};

/// Certified mode enforces every contraction precondition and turns
/// violations into errors; exploratory mode logs them and keeps going.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Certified,
    Exploratory,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Certified => f.write_str("certified"),
            Mode::Exploratory => f.write_str("exploratory"),
        }
    }
}

/// Solver knobs. `tol_step` defaults to 1e-12 * max(1, R) at solve time.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub mode: Mode,
    pub tol_step: Option<f64>,
    pub tol_res: f64,
    pub linear_tol: f64,
    pub max_iterations: usize,
    /// Start iterate; defaults to 0, the center of the working ball.
    pub start: Option<HilbertVector>,
    /// Seed for contraction probing and constant estimation.
    pub seed: u64,
    /// Sampled pairs used for the ball contraction estimate.
    pub contraction_probes: usize,
    /// Precomputed constants for the direct path (estimated when absent).
    pub direct_constants: Option<DirectConstants>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Certified,
            tol_step: None,
            tol_res: 1e-10,
            linear_tol: LINEAR_TOLERANCE,
            max_iterations: 500,
            start: None,
            seed: 0,
            contraction_probes: 32,
            direct_constants: None,
        }
    }
}

/// The regularized problem F(u) + eps (u - w) = 0 in a chosen norm.
pub struct RegularizationProblem<'a> {
    pub op: &'a dyn OperatorModel,
    pub epsilon: f64,
    pub w: HilbertVector,
    pub norm: Norm,
}

impl<'a> RegularizationProblem<'a> {
    pub fn new(
        op: &'a dyn OperatorModel,
        epsilon: f64,
        w: HilbertVector,
        norm: Norm,
    ) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if w.space() != &op.space() {
            return Err(Error::Shape(
                "w does not live in the operator's space".into(),
            ));
        }
        if matches!(norm, Norm::H1) && op.space().grid().is_none() {
            return Err(Error::Shape("H1 problems need a grid operator".into()));
        }
        Ok(Self {
            op,
            epsilon,
            w,
            norm,
        })
    }
}

/// Outcome of one Picard run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: HilbertVector,
    pub iterations: usize,
    /// Residual ||F(y+z_k) + eps z_k + eps (y - w)|| per iterate, z_0 first;
    /// length is iterations + 1.
    pub residual_history: Vec<f64>,
    /// Consecutive-step ratios ||z_{k+1}-z_k|| / ||z_k-z_{k-1}||.
    pub step_ratio_history: Vec<f64>,
    pub final_residual: f64,
    pub converged: bool,
    pub ball_radius: f64,
    pub exited_ball: bool,
    /// Measured contraction of the fixed-point map on the working ball:
    /// the max Lipschitz ratio over sampled pairs, iterate pairs included.
    pub contraction_estimate: f64,
    /// Norm of the solution in the problem norm.
    pub norm_solution: f64,
    /// True when the run enforced (and passed) every certified precondition.
    pub certified_run: bool,
}

fn gate(certified: bool, ok: bool, message: String) -> Result<()> {
    if ok {
        Ok(())
    } else if certified {
        Err(Error::Precondition(message))
    } else {
        log::warn!("{message}; continuing in exploratory mode");
        Ok(())
    }
}

/// Max Lipschitz ratio of the fixed-point map over sampled pairs in the
/// working ball. Smooth aligned pairs (constant direction first) carry the
/// worst case for smoothing kernels; rough independent pairs are mixed in.
/// `t_diff` evaluates ||T(a) - T(b)||.
fn probe_ball_contraction(
    space: &crate::hilbert::SpaceTag,
    norm: Norm,
    radius: f64,
    probes: usize,
    seed: u64,
    mut t_diff: impl FnMut(&HilbertVector, &HilbertVector) -> Result<f64>,
) -> Result<f64> {
    if probes == 0 || radius <= 0.0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    let mut check = |a: &HilbertVector, b: &HilbertVector, best: &mut f64| -> Result<()> {
        let denom = a.sub(b)?.norm(norm)?;
        if denom > 1e-13 * radius {
            let ratio = t_diff(a, b)? / denom;
            *best = best.max(ratio);
        }
        Ok(())
    };
    // constant-direction aligned pair
    let ones = HilbertVector::constant(*space, 1.0)?;
    let ones_norm = ones.norm(norm)?;
    if ones_norm > 0.0 {
        let unit = ones.scaled(1.0 / ones_norm);
        check(&unit.scaled(radius), &unit.scaled(0.9 * radius), &mut best)?;
    }
    for p in 1..probes {
        match p % 3 {
            0 => {
                // smooth aligned pair
                let u = sampling::smooth_unit_vector(space, norm, &mut rng)?;
                check(&u.scaled(radius), &u.scaled(0.9 * radius), &mut best)?;
            }
            1 => {
                // smooth independent pair, one on the sphere
                let u = sampling::smooth_unit_vector(space, norm, &mut rng)?;
                let v = sampling::smooth_unit_vector(space, norm, &mut rng)?;
                let t: f64 = rng.gen_range(0.0..=1.0);
                check(&u.scaled(radius), &v.scaled(t * radius), &mut best)?;
            }
            _ => {
                // rough independent pair
                let u = sampling::unit_vector(space, norm, &mut rng)?;
                let v = sampling::unit_vector(space, norm, &mut rng)?;
                let s: f64 = rng.gen_range(0.0..=1.0);
                check(&u.scaled(radius), &v.scaled(s * radius), &mut best)?;
            }
        }
    }
    Ok(best)
}

/// General Picard iteration on the shifted-resolvent form.
pub fn picard_solve_general(
    problem: &RegularizationProblem,
    constants: &TheoremConstants,
    options: &SolveOptions,
) -> Result<SolveReport> {
    let op = problem.op;
    let eps = problem.epsilon;
    let norm = problem.norm;
    if (constants.epsilon - eps).abs() > 1e-9 * eps {
        return Err(Error::InvalidInput(format!(
            "constants were computed at eps = {:.6e}, problem has eps = {:.6e}",
            constants.epsilon, eps
        )));
    }
    let certified = options.mode == Mode::Certified;
    gate(
        certified,
        constants.q < 1.0,
        format!(
            "contraction requires q = (c/eps)(M3 R^2/6 + M2 R) < 1, got q = {:.6}",
            constants.q
        ),
    )?;
    gate(
        certified,
        eps <= constants.epsilon_max,
        format!(
            "certification requires eps <= eps_max = {:.6e} (largest eps with q < 1), got eps = {eps:.6e}",
            constants.epsilon_max
        ),
    )?;
    let y = op.base_point();
    let fy = op.evaluate(&y)?;
    let root_norm = fy.norm(norm)?;
    gate(
        certified,
        root_norm <= ROOT_TOLERANCE,
        format!("base point must be a root: ||F(y)|| = {root_norm:.3e} > {ROOT_TOLERANCE:.1e}"),
    )?;

    let radius = constants.r_min;
    let tol_step = options.tol_step.unwrap_or(1e-12 * radius.max(1.0));
    let solver = ShiftedSolver::new(op, eps, &y, options.linear_tol)?;
    let y_minus_w = y.sub(&problem.w)?;
    let shift_term = solver.solve(&y_minus_w)?.scaled(eps);
    let eps_y_minus_w = y_minus_w.scaled(eps);

    let mut z = match &options.start {
        Some(s) => {
            if s.space() != &op.space() {
                return Err(Error::Shape(
                    "start iterate lives in the wrong space".into(),
                ));
            }
            s.clone()
        }
        None => HilbertVector::zeros(op.space()),
    };
    let z0_norm = z.norm(norm)?;
    gate(
        certified,
        z0_norm <= radius,
        format!("start iterate must lie in the ball: ||z_0|| = {z0_norm:.3e} > R = {radius:.3e}"),
    )?;
    let mut exited_ball = z0_norm > radius;

    let residual_of = |fz: &HilbertVector, z: &HilbertVector| -> Result<f64> {
        fz.axpy(eps, z)?.add(&eps_y_minus_w)?.norm(norm)
    };
    let mut fz = op.evaluate(&y.add(&z)?)?;
    let mut residual = residual_of(&fz, &z)?;
    let mut residual_history = vec![residual];
    let mut step_ratio_history = Vec::new();
    let mut prev_step: Option<f64> = None;
    let mut iterations = 0;
    for k in 1..=options.max_iterations {
        let az = op.derivative_apply(&y, &z)?;
        let kz = fz.sub(&fy)?.sub(&az)?;
        let z_next = solver.solve(&kz)?.scaled(-1.0).sub(&shift_term)?;
        if !z_next.is_finite() {
            log::warn!("iteration diverged to non-finite values at step {k}");
            residual = f64::INFINITY;
            residual_history.push(residual);
            iterations = k;
            break;
        }
        let step = z_next.sub(&z)?.norm(norm)?;
        if let Some(p) = prev_step {
            if p > 0.0 {
                step_ratio_history.push(step / p);
            }
        }
        prev_step = Some(step);
        z = z_next;
        let z_norm = z.norm(norm)?;
        if z_norm > radius {
            exited_ball = true;
            if certified {
                return Err(Error::BallExit {
                    iteration: k,
                    norm: z_norm,
                    radius,
                });
            }
        }
        fz = op.evaluate(&y.add(&z)?)?;
        residual = residual_of(&fz, &z)?;
        residual_history.push(residual);
        iterations = k;
        if step <= tol_step || residual <= options.tol_res {
            break;
        }
    }

    let mut contraction_estimate = step_ratio_history.iter().copied().fold(0.0f64, f64::max);
    {
        let space = op.space();
        let map_once = |x: &HilbertVector| -> Result<HilbertVector> {
            let fx = op.evaluate(&y.add(x)?)?;
            let ax = op.derivative_apply(&y, x)?;
            let kx = fx.sub(&fy)?.sub(&ax)?;
            solver.solve(&kx)
        };
        let probed = probe_ball_contraction(
            &space,
            norm,
            radius,
            options.contraction_probes,
            options.seed,
            |a, b| map_once(a)?.sub(&map_once(b)?)?.norm(norm),
        )?;
        contraction_estimate = contraction_estimate.max(probed);
    }

    let converged = residual <= options.tol_res;
    let norm_solution = z.norm(norm)?;
    Ok(SolveReport {
        solution: z,
        iterations,
        residual_history,
        step_ratio_history,
        final_residual: residual,
        converged,
        ball_radius: radius,
        exited_ball,
        contraction_estimate,
        norm_solution,
        certified_run: certified,
    })
}

/// Constants of the direct (vanishing-linearization) path, estimated per
/// grid by sampling: c1 bounds ||F(u)|| <= c1 ||u||^3 and c2 bounds the
/// Lipschitz ratio ||F(u) - F(z)|| <= c2 ||u - z|| R^2 on B(R).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectConstants {
    pub c1: f64,
    pub c2: f64,
    /// min((1 + c1)^{-3}, c2^{-3}): below this the ball maps into itself and
    /// the iteration contracts.
    pub epsilon_max: f64,
}

/// Sample c1 and c2 on the unit sphere/ball of the operator's natural norm,
/// inflated by the usual safety factor. For the cubic-homogeneous instances
/// these constants transfer to every radius.
pub fn estimate_direct_constants(
    op: &dyn OperatorModel,
    samples: usize,
    seed: u64,
) -> Result<DirectConstants> {
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let norm = op.natural_norm();
    let space = op.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<(HilbertVector, HilbertVector)> = Vec::new();
    // the normalized constant function is the natural worst smooth case for a
    // smoothing kernel; include it deliberately
    let ones = HilbertVector::constant(space, 1.0)?;
    let ones_norm = ones.norm(norm)?;
    if ones_norm > 0.0 {
        let u = ones.scaled(1.0 / ones_norm);
        let fu = op.evaluate(&u)?;
        pool.push((u, fu));
    }
    for _ in 0..samples {
        let u = sampling::smooth_unit_vector(&space, norm, &mut rng)?;
        let fu = op.evaluate(&u)?;
        pool.push((u, fu));
        let u = sampling::unit_vector(&space, norm, &mut rng)?;
        let fu = op.evaluate(&u)?;
        pool.push((u, fu));
    }
    let mut c1: f64 = 0.0;
    for (_, fu) in &pool {
        c1 = c1.max(fu.norm(norm)?);
    }
    let mut c2: f64 = 0.0;
    for i in 0..pool.len() {
        // aligned pair: captures the near-tangential worst case
        let (u, fu) = &pool[i];
        let v = u.scaled(0.9);
        let fv = op.evaluate(&v)?;
        let denom = u.sub(&v)?.norm(norm)?;
        if denom > 0.0 {
            c2 = c2.max(fu.sub(&fv)?.norm(norm)? / denom);
        }
        // cross pair with the next pool entry
        let (z, fz) = &pool[(i + 1) % pool.len()];
        let denom = u.sub(z)?.norm(norm)?;
        if denom > 1e-12 {
            c2 = c2.max(fu.sub(fz)?.norm(norm)? / denom);
        }
    }
    c1 *= crate::operator::BOUND_SAFETY_FACTOR;
    c2 *= crate::operator::BOUND_SAFETY_FACTOR;
    let ball_cap = (1.0 + c1).powi(-3);
    let contraction_cap = if c2 > 0.0 { c2.powi(-3) } else { f64::INFINITY };
    Ok(DirectConstants {
        c1,
        c2,
        epsilon_max: ball_cap.min(contraction_cap),
    })
}

/// Direct Picard iteration u <- -(1/eps) F(u) + eps h for operators whose
/// linearization vanishes at the base point. `h` is normalized to the unit
/// sphere of the natural norm on entry (a zero h is accepted in exploratory
/// mode and fixes u = 0).
pub fn picard_solve_direct(
    op: &dyn OperatorModel,
    eps: f64,
    h: &HilbertVector,
    options: &SolveOptions,
) -> Result<SolveReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    if h.space() != &op.space() {
        return Err(Error::Shape(
            "h does not live in the operator's space".into(),
        ));
    }
    let norm = op.natural_norm();
    let certified = options.mode == Mode::Certified;
    let y = op.base_point();
    let fy_norm = op.evaluate(&y)?.norm(norm)?;
    gate(
        certified,
        fy_norm <= ROOT_TOLERANCE,
        format!("base point must be a root: ||F(y)|| = {fy_norm:.3e} > {ROOT_TOLERANCE:.1e}"),
    )?;
    // the direct form is only the fixed-point map of the equation when the
    // linearization vanishes at the root
    {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0x9e3779b97f4a7c15);
        let probe = sampling::unit_vector(&op.space(), norm, &mut rng)?;
        let a_norm = op.derivative_apply(&y, &probe)?.norm(norm)?;
        gate(
            certified,
            a_norm <= 1e-10,
            format!("direct iteration requires F'(y) = 0, got ||F'(y) psi|| = {a_norm:.3e}"),
        )?;
    }

    let h_norm = h.norm(norm)?;
    let h_used = if h_norm > 0.0 {
        h.scaled(1.0 / h_norm)
    } else {
        gate(
            certified,
            false,
            "h must be normalizable: ||h|| = 0".to_string(),
        )?;
        h.clone()
    };

    let constants = match options.direct_constants {
        Some(c) => c,
        None => estimate_direct_constants(op, 12, options.seed)?,
    };
    gate(
        certified,
        eps < constants.epsilon_max,
        format!(
            "certification requires eps < eps_max = min((1+c1)^-3, c2^-3) = {:.6e}, got eps = {eps:.6e}",
            constants.epsilon_max
        ),
    )?;

    let cbrt = eps.cbrt();
    let radius = cbrt * cbrt;
    let tol_step = options.tol_step.unwrap_or(1e-12 * radius.max(1.0));

    let mut u = match &options.start {
        Some(s) => {
            if s.space() != &op.space() {
                return Err(Error::Shape(
                    "start iterate lives in the wrong space".into(),
                ));
            }
            s.clone()
        }
        None => HilbertVector::zeros(op.space()),
    };
    let u0_norm = u.norm(norm)?;
    gate(
        certified,
        u0_norm <= radius,
        format!("start iterate must lie in the ball: ||u_0|| = {u0_norm:.3e} > R = {radius:.3e}"),
    )?;
    let mut exited_ball = u0_norm > radius;

    // residual of F(u) + eps (u - eps h)
    let residual_of = |fu: &HilbertVector, u: &HilbertVector| -> Result<f64> {
        fu.axpy(eps, u)?.axpy(-eps * eps, &h_used)?.norm(norm)
    };
    let mut fu = op.evaluate(&u)?;
    let mut residual = residual_of(&fu, &u)?;
    let mut residual_history = vec![residual];
    let mut step_ratio_history = Vec::new();
    let mut prev_step: Option<f64> = None;
    let mut iterations = 0;
    for k in 1..=options.max_iterations {
        let u_next = fu.scaled(-1.0 / eps).axpy(eps, &h_used)?;
        if !u_next.is_finite() {
            log::warn!("iteration diverged to non-finite values at step {k}");
            residual = f64::INFINITY;
            residual_history.push(residual);
            iterations = k;
            break;
        }
        let step = u_next.sub(&u)?.norm(norm)?;
        if let Some(p) = prev_step {
            if p > 0.0 {
                step_ratio_history.push(step / p);
            }
        }
        prev_step = Some(step);
        u = u_next;
        let u_norm = u.norm(norm)?;
        if u_norm > radius {
            exited_ball = true;
            if certified {
                return Err(Error::BallExit {
                    iteration: k,
                    norm: u_norm,
                    radius,
                });
            }
        }
        fu = op.evaluate(&u)?;
        residual = residual_of(&fu, &u)?;
        residual_history.push(residual);
        iterations = k;
        if step <= tol_step || residual <= options.tol_res {
            break;
        }
    }

    let mut contraction_estimate = step_ratio_history.iter().copied().fold(0.0f64, f64::max);
    {
        let space = op.space();
        let probed = probe_ball_contraction(
            &space,
            norm,
            radius,
            options.contraction_probes,
            options.seed,
            |a, b| Ok(op.evaluate(a)?.sub(&op.evaluate(b)?)?.norm(norm)? / eps),
        )?;
        contraction_estimate = contraction_estimate.max(probed);
    }

    let converged = residual <= options.tol_res;
    let norm_solution = u.norm(norm)?;
    Ok(SolveReport {
        solution: u,
        iterations,
        residual_history,
        step_ratio_history,
        final_residual: residual,
        converged,
        ball_radius: radius,
        exited_ball,
        contraction_estimate,
        norm_solution,
        certified_run: certified,
    })
}
