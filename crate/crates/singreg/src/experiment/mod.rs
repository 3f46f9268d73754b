//! Experiment drivers behind the CLI: problem construction from config,
//! epsilon sweeps with deterministic CSV output and a log-log rate fit,
//! resolvent certification, and oracle cross-checks.

mod config;

pub use config::{
    EpsilonSpec, ExperimentConfig, GridSpec, LogRange, ProblemSpec, ShiftFunction, Tolerances,
    SCHEMA_VERSION,
};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{HilbertVector, Norm};
use crate::operator::{
    sample_derivative_bounds, MatrixQuadratic, NewtonianCubicOperator, OperatorModel, ScalarCubic,
};
use crate::oracle;
use crate::rate::{fit_rate, RateFit};
use crate::solver::{
    choose_w, compute_theorem_constants, estimate_direct_constants, estimate_resolvent_constant,
    picard_solve_direct, picard_solve_general, Mode, RegularizationProblem, SolveOptions,
    SolveReport,
};

/// One CSV row of a sweep. `max_step_ratio` is the measured contraction of
/// the fixed-point map on the working ball (sampled pairs, iterate pairs
/// included).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub norm_solution: f64,
    pub iterations: usize,
    pub final_residual: f64,
    pub max_step_ratio: f64,
    pub ball_radius: f64,
    pub exited_ball: bool,
}

impl SweepRow {
    fn from_report(epsilon: f64, report: &SolveReport) -> Self {
        Self {
            epsilon,
            norm_solution: report.norm_solution,
            iterations: report.iterations,
            final_residual: report.final_residual,
            max_step_ratio: report.contraction_estimate,
            ball_radius: report.ball_radius,
            exited_ball: report.exited_ball,
        }
    }
}

/// Sweep result: rows ordered by descending epsilon, the fit (when at least
/// three positive solution norms exist), and the rendered CSV.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub fit: Option<RateFit>,
    pub fit_note: String,
    pub csv: String,
}

/// A problem built from config, ready to solve at any epsilon.
pub enum ProblemInstance {
    /// Vanishing-linearization instances solved by the direct iteration.
    Direct {
        op: Box<dyn OperatorModel>,
        h: HilbertVector,
    },
    /// General instances solved through the shifted resolvent.
    General {
        op: Box<dyn OperatorModel>,
        w: HilbertVector,
        v_norm: f64,
        c: f64,
        m2: f64,
        m3: f64,
    },
}

impl ProblemInstance {
    pub fn operator(&self) -> &dyn OperatorModel {
        match self {
            ProblemInstance::Direct { op, .. } => op.as_ref(),
            ProblemInstance::General { op, .. } => op.as_ref(),
        }
    }
}

/// Build the operator and shift data described by the config.
pub fn build_instance(config: &ExperimentConfig) -> Result<ProblemInstance> {
    match &config.problem {
        ProblemSpec::ScalarCubic { h_scale } => {
            let op = ScalarCubic::new();
            let h = HilbertVector::from_abstract(vec![*h_scale])?;
            Ok(ProblemInstance::Direct {
                op: Box::new(op),
                h,
            })
        }
        ProblemSpec::NewtonianCubic { grid, h } => {
            let domain = grid.build()?;
            let op = NewtonianCubicOperator::new(domain)?;
            let h = match h {
                ShiftFunction::Constant => HilbertVector::constant(op.space(), 1.0)?,
                ShiftFunction::Coefficients { values } => {
                    HilbertVector::on_grid(domain, values.clone())?
                }
            };
            Ok(ProblemInstance::Direct {
                op: Box::new(op),
                h,
            })
        }
        ProblemSpec::MatrixQuadratic {
            matrix,
            quadratic,
            v,
            w,
            analytic_m2,
            symmetric_psd,
            bound_radius,
        } => {
            let n = matrix.len();
            let a = crate::linalg::DenseMatrix::from_rows(matrix)?;
            let mut tensor = Vec::with_capacity(n * n * n);
            for plane in quadratic {
                for row in plane {
                    tensor.extend_from_slice(row);
                }
            }
            let op = MatrixQuadratic::new(a, tensor, *analytic_m2, *symmetric_psd)?;
            let certified = config.mode == Mode::Certified;
            let radius = bound_radius.unwrap_or(1.0);
            let (m2, m3) = match op.analytic_bounds(radius) {
                Some(b) => b,
                None => {
                    log::info!("sampling derivative bounds at radius {radius}");
                    sample_derivative_bounds(&op, radius, 160, config.seed)?
                }
            };
            let c = match config.resolvent_c {
                Some(c) => c,
                None if *symmetric_psd => 1.0,
                None => {
                    if certified {
                        return Err(Error::Precondition(
                            "certified mode needs resolvent_c (or a symmetric PSD flag); \
                             the power-iteration estimate is only a lower bound"
                                .into(),
                        ));
                    }
                    let grid = config.epsilons.resolve()?;
                    let est = estimate_resolvent_constant(&op, &grid, 500)?;
                    log::warn!(
                        "using estimated resolvent constant {:.6e} (lower bound)",
                        est.c_lower_bound
                    );
                    est.c_lower_bound
                }
            };
            let (w_vec, v_norm) = match (v, w) {
                (Some(v), _) => {
                    let v = HilbertVector::from_abstract(v.clone())?;
                    let v_norm = v.norm(Norm::L2)?;
                    let w = choose_w(&op, &v, Some((c, m2)))?;
                    (w, v_norm)
                }
                (None, Some(w)) => {
                    if certified {
                        return Err(Error::Precondition(
                            "certified mode needs the admissible direction v with y - w = A v; \
                             a direct w carries no admissibility certificate"
                                .into(),
                        ));
                    }
                    log::warn!(
                        "direct w supplied; constants use ||v|| = 0 (radius window degenerates)"
                    );
                    (HilbertVector::from_abstract(w.clone())?, 0.0)
                }
                (None, None) => unreachable!("validated at parse time"),
            };
            Ok(ProblemInstance::General {
                op: Box::new(op),
                w: w_vec,
                v_norm,
                c,
                m2,
                m3,
            })
        }
    }
}

/// Solver options assembled from the config's mode, seed, and tolerance
/// overrides.
pub fn solve_options(config: &ExperimentConfig) -> SolveOptions {
    let t = &config.tolerances;
    let defaults = SolveOptions::default();
    SolveOptions {
        mode: config.mode,
        tol_step: t.tol_step,
        tol_res: t.tol_res.unwrap_or(defaults.tol_res),
        linear_tol: t.linear_tol.unwrap_or(defaults.linear_tol),
        max_iterations: t.max_iterations.unwrap_or(defaults.max_iterations),
        start: None,
        seed: config.seed,
        contraction_probes: t.contraction_probes.unwrap_or(defaults.contraction_probes),
        direct_constants: None,
    }
}

/// Solve the instance at one epsilon.
pub fn solve_at(
    instance: &ProblemInstance,
    eps: f64,
    norm: Norm,
    options: &SolveOptions,
) -> Result<SolveReport> {
    match instance {
        ProblemInstance::Direct { op, h } => picard_solve_direct(op.as_ref(), eps, h, options),
        ProblemInstance::General {
            op,
            w,
            v_norm,
            c,
            m2,
            m3,
        } => {
            let constants = compute_theorem_constants(*c, *m2, *m3, *v_norm, eps)?;
            let problem = RegularizationProblem::new(op.as_ref(), eps, w.clone(), norm)?;
            picard_solve_general(&problem, &constants, options)
        }
    }
}

/// Run one solve per epsilon (in parallel), ordered by descending epsilon,
/// and fit log ||solution|| against log eps.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutcome> {
    let instance = build_instance(config)?;
    let epsilons = config.epsilons.resolve()?;
    let norm = config.norm();
    let mut options = solve_options(config);
    if let ProblemInstance::Direct { op, .. } = &instance {
        // estimate the direct-path constants once per sweep
        options.direct_constants = Some(estimate_direct_constants(op.as_ref(), 16, config.seed)?);
    }
    let rows: Vec<SweepRow> = epsilons
        .par_iter()
        .map(|&eps| {
            solve_at(&instance, eps, norm, &options).map(|r| SweepRow::from_report(eps, &r))
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.epsilon, r.norm_solution)).collect();
    let (fit, fit_note) = match fit_rate(&pairs) {
        Ok(fit) => (Some(fit), String::new()),
        Err(Error::NoFit { positive }) => (
            None,
            format!("skipped: only {positive} positive solution norms (need 3)"),
        ),
        Err(e) => return Err(e),
    };
    let csv = render_csv(&rows, fit.as_ref(), &fit_note);
    Ok(SweepOutcome {
        rows,
        fit,
        fit_note,
        csv,
    })
}

/// 17-significant-digit decimal rendering; round-trips f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Fixed column order; the fit summary rides along as comment lines.
pub fn render_csv(rows: &[SweepRow], fit: Option<&RateFit>, fit_note: &str) -> String {
    let mut out = String::from(
        "epsilon,norm_solution,iterations,final_residual,max_step_ratio,ball_radius,exited_ball\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(r.epsilon),
            fmt_f64(r.norm_solution),
            r.iterations,
            fmt_f64(r.final_residual),
            fmt_f64(r.max_step_ratio),
            fmt_f64(r.ball_radius),
            r.exited_ball,
        ));
    }
    match fit {
        Some(f) => out.push_str(&format!(
            "# rate_fit slope={} intercept={} r2={} points_used={}\n",
            fmt_f64(f.slope),
            fmt_f64(f.intercept),
            fmt_f64(f.r_squared),
            f.points_used,
        )),
        None => out.push_str(&format!("# rate_fit {fit_note}\n")),
    }
    out
}

/// Resolvent certification outcome.
#[derive(Debug, Clone)]
pub struct CertifyOutcome {
    pub c_lower_bound: f64,
    pub per_epsilon: Vec<(f64, f64)>,
    pub low_confidence: bool,
    pub bound: f64,
    pub passed: bool,
}

/// Estimate the resolvent constant of the instance's linearization over the
/// config's epsilon grid and compare against the user bound.
pub fn certify_resolvent(config: &ExperimentConfig) -> Result<CertifyOutcome> {
    let instance = build_instance(config)?;
    let mut epsilons = config.epsilons.resolve()?;
    epsilons.reverse(); // report ascending
    let max_iters = config.tolerances.power_iterations.unwrap_or(500);
    let est = estimate_resolvent_constant(instance.operator(), &epsilons, max_iters)?;
    let bound = config.resolvent_bound.unwrap_or(1.0 + 1e-8);
    let passed = est.c_lower_bound <= bound;
    Ok(CertifyOutcome {
        c_lower_bound: est.c_lower_bound,
        per_epsilon: est.per_epsilon,
        low_confidence: est.low_confidence,
        bound,
        passed,
    })
}

/// One oracle cross-check line.
#[derive(Debug, Clone)]
pub struct VerifyLine {
    pub label: String,
    pub solver_value: f64,
    pub oracle_value: f64,
    pub distance: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub lines: Vec<VerifyLine>,
    pub passed: bool,
}

/// Agreement tolerances of the verify subcommand, per instance kind.
pub const VERIFY_TOL_SCALAR: f64 = 1e-10;
pub const VERIFY_TOL_MATRIX: f64 = 1e-8;
pub const VERIFY_TOL_KERNEL_REL: f64 = 0.05;
pub const VERIFY_TOL_NEWTONIAN: f64 = 1e-9;

/// Run the main solver against the matching oracle and report distances.
pub fn verify(config: &ExperimentConfig) -> Result<VerifyOutcome> {
    let instance = build_instance(config)?;
    let epsilons = config.epsilons.resolve()?;
    let norm = config.norm();
    let mut options = solve_options(config);
    let mut lines = Vec::new();
    match (&config.problem, &instance) {
        (ProblemSpec::ScalarCubic { .. }, ProblemInstance::Direct { op, h }) => {
            // tight tolerances: the bisection comparison is at 1e-10 and the
            // equation's Jacobian near the root is O(eps)
            options.tol_step = Some(1e-15);
            options.tol_res = 1e-15;
            options.direct_constants =
                Some(estimate_direct_constants(op.as_ref(), 16, config.seed)?);
            let h_sign = if h.coeffs()[0] < 0.0 { -1.0 } else { 1.0 };
            for &eps in &epsilons {
                let report = picard_solve_direct(op.as_ref(), eps, h, &options)?;
                let f = |u: f64| u * u * u + eps * u - eps * eps * h_sign;
                let root = oracle::scalar_bisection(f, -1.0, 1.0, 1e-13)?;
                let solver_value = report.solution.coeffs()[0];
                let distance = (solver_value - root.value).abs();
                lines.push(VerifyLine {
                    label: format!("scalar_cubic eps={} picard vs bisection", fmt_f64(eps)),
                    solver_value,
                    oracle_value: root.value,
                    distance,
                    tolerance: VERIFY_TOL_SCALAR,
                    passed: distance <= VERIFY_TOL_SCALAR,
                });
            }
        }
        (ProblemSpec::MatrixQuadratic { .. }, ProblemInstance::General { op, w, .. }) => {
            for &eps in &epsilons {
                let report = solve_at(&instance, eps, norm, &options)?;
                let start = HilbertVector::zeros(op.space());
                let newton = oracle::dense_newton(op.as_ref(), eps, w, &start, 1e-12)?;
                if !newton.certified {
                    return Err(Error::Oracle(format!(
                        "Newton oracle did not certify at eps = {eps:.3e} (residual {:.3e})",
                        newton.certified_error
                    )));
                }
                let distance = report.solution.sub(&newton.value)?.norm(norm)?;
                lines.push(VerifyLine {
                    label: format!("matrix_quadratic eps={} picard vs newton", fmt_f64(eps)),
                    solver_value: report.norm_solution,
                    oracle_value: newton.value.norm(norm)?,
                    distance,
                    tolerance: VERIFY_TOL_MATRIX,
                    passed: distance <= VERIFY_TOL_MATRIX,
                });
            }
        }
        (ProblemSpec::NewtonianCubic { .. }, ProblemInstance::Direct { op, h }) => {
            let newtonian = op
                .space()
                .grid()
                .copied()
                .ok_or_else(|| Error::Shape("newtonian instance without grid".into()))?;
            // kernel spot check: potential of the constant-one field at the
            // node nearest the box center, against refined midpoint quadrature
            let ones = HilbertVector::constant(op.space(), 1.0)?;
            let potential = op.evaluate(&ones)?;
            let center = [
                newtonian.lower()[0] + 0.5 * newtonian.edges()[0],
                newtonian.lower()[1] + 0.5 * newtonian.edges()[1],
                newtonian.lower()[2] + 0.5 * newtonian.edges()[2],
            ];
            let node = nearest_node(&newtonian, center);
            let (ix, iy, iz) = newtonian.coords_of(node);
            let at = newtonian.position(ix, iy, iz);
            let oracle_value = oracle::refined_quadrature(&newtonian, &|_| 1.0, at, 4)?;
            let solver_value = potential.coeffs()[node];
            let distance = (solver_value - oracle_value.value).abs();
            let tolerance = VERIFY_TOL_KERNEL_REL * oracle_value.value.abs();
            lines.push(VerifyLine {
                label: "newtonian_cubic kernel vs refined quadrature (center node)".into(),
                solver_value,
                oracle_value: oracle_value.value,
                distance,
                tolerance,
                passed: distance <= tolerance,
            });
            // solution check: defaults vs a 10x tighter rerun
            options.direct_constants =
                Some(estimate_direct_constants(op.as_ref(), 16, config.seed)?);
            for &eps in &epsilons {
                let report = picard_solve_direct(op.as_ref(), eps, h, &options)?;
                let mut tight = options.clone();
                let radius = eps.cbrt().powi(2);
                tight.tol_step = Some(options.tol_step.unwrap_or(1e-12 * radius.max(1.0)) * 0.1);
                tight.tol_res = options.tol_res * 0.1;
                let reference = picard_solve_direct(op.as_ref(), eps, h, &tight)?;
                let distance = report.solution.sub(&reference.solution)?.norm(norm)?;
                lines.push(VerifyLine {
                    label: format!(
                        "newtonian_cubic eps={} picard vs tightened fixed point",
                        fmt_f64(eps)
                    ),
                    solver_value: report.norm_solution,
                    oracle_value: reference.norm_solution,
                    distance,
                    tolerance: VERIFY_TOL_NEWTONIAN,
                    passed: distance <= VERIFY_TOL_NEWTONIAN,
                });
            }
        }
        _ => unreachable!("instance kind always matches the configured problem kind"),
    }
    let passed = lines.iter().all(|l| l.passed);
    Ok(VerifyOutcome { lines, passed })
}

fn nearest_node(grid: &crate::grid::GridDomain, p: [f64; 3]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for idx in 0..grid.len() {
        let (ix, iy, iz) = grid.coords_of(idx);
        let q = grid.position(ix, iy, iz);
        let d = (0..3).map(|a| (p[a] - q[a]).powi(2)).sum::<f64>();
        if d < best_d {
            best_d = d;
            best = idx;
        }
    }
    best
}
