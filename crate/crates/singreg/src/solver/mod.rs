//! Regularization machinery: contraction constants, shifted linear solves,
//! the resolvent-constant estimator, and the Picard fixed-point iterations.

mod constants;
mod linear;
mod picard;

pub use constants::{choose_w, compute_theorem_constants, TheoremConstants};
pub use linear::{
    default_epsilon_grid, estimate_resolvent_constant, log_spaced, shifted_solve,
    ResolventEstimate, ShiftedSolver, LINEAR_TOLERANCE,
};
pub use picard::{
    estimate_direct_constants, picard_solve_direct, picard_solve_general, DirectConstants, Mode,
    RegularizationProblem, SolveOptions, SolveReport,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDomain;
    use crate::hilbert::{HilbertVector, Norm};
    use crate::operator::{MatrixQuadratic, NewtonianCubicOperator, OperatorModel, ScalarCubic};
    use crate::oracle;

    /// The standard certified 2D family: A = diag(0,1), componentwise square
    /// with beta = 0.5 (analytic M2 = 1), shift direction v = (0.05, 0.1).
    fn family() -> (MatrixQuadratic, HilbertVector, f64) {
        let op = MatrixQuadratic::componentwise_square_2d(0.5);
        let v = HilbertVector::from_abstract(vec![0.05, 0.1]).unwrap();
        let v_norm = v.norm(Norm::L2).unwrap();
        (op, v, v_norm)
    }

    fn certified_constants(eps: f64) -> TheoremConstants {
        let (_, _, v_norm) = family();
        compute_theorem_constants(1.0, 1.0, 0.0, v_norm, eps).unwrap()
    }

    #[test]
    fn zero_shift_fixes_the_origin_in_one_iteration() {
        let (op, _, _) = family();
        let eps = 1e-2;
        let w = op.base_point(); // w = y
        let constants = compute_theorem_constants(1.0, 1.0, 0.0, 0.0, eps).unwrap();
        let problem = RegularizationProblem::new(&op, eps, w, Norm::L2).unwrap();
        let report = picard_solve_general(&problem, &constants, &SolveOptions::default()).unwrap();
        assert_eq!(report.iterations, 1);
        assert!(report.converged);
        assert_eq!(report.norm_solution, 0.0);
        assert!(!report.exited_ball);
        assert_eq!(report.residual_history.len(), report.iterations + 1);
    }

    #[test]
    fn general_solve_matches_newton_oracle_and_contracts() {
        let (op, v, _) = family();
        let eps = 1e-2;
        let w = choose_w(&op, &v, Some((1.0, 1.0))).unwrap();
        let constants = certified_constants(eps);
        let problem = RegularizationProblem::new(&op, eps, w.clone(), Norm::L2).unwrap();
        let report = picard_solve_general(&problem, &constants, &SolveOptions::default()).unwrap();
        assert!(report.converged);
        assert!(!report.exited_ball);
        assert!(report.final_residual <= 1e-10);
        // independent recomputation of the residual contract
        let u = op.base_point().add(&report.solution).unwrap();
        let recomputed = op
            .evaluate(&u)
            .unwrap()
            .axpy(eps, &u.sub(&w).unwrap())
            .unwrap()
            .norm(Norm::L2)
            .unwrap();
        assert!(recomputed <= 1e-10, "recomputed residual {recomputed}");
        for r in &report.step_ratio_history {
            assert!(
                *r <= constants.q + 0.05,
                "step ratio {r} vs q {}",
                constants.q
            );
        }
        assert!(report.contraction_estimate <= constants.q + 0.05);
        let start = HilbertVector::zeros(op.space());
        let newton = oracle::dense_newton(&op, eps, &w, &start, 1e-12).unwrap();
        assert!(newton.certified);
        let gap = report
            .solution
            .sub(&newton.value)
            .unwrap()
            .norm(Norm::L2)
            .unwrap();
        assert!(gap <= 1e-8, "Picard vs Newton gap {gap}");
        // Newton oracle and Picard agree within 10*(tol_newton + tol_res)
        assert!(gap <= 10.0 * (1e-12 + 1e-10));
    }

    #[test]
    fn certified_mode_rejects_inadmissible_eps_for_direct_path() {
        let grid = GridDomain::unit_cube(4).unwrap();
        let op = NewtonianCubicOperator::new(grid).unwrap();
        let h = HilbertVector::constant(op.space(), 1.0).unwrap();
        let err = picard_solve_direct(&op, 0.9, &h, &SolveOptions::default()).unwrap_err();
        match err {
            crate::error::Error::Precondition(msg) => {
                assert!(
                    msg.contains("eps_max"),
                    "diagnostic names the inequality: {msg}"
                )
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn direct_solve_first_iterate_is_eps_h() {
        let grid = GridDomain::unit_cube(5).unwrap();
        let op = NewtonianCubicOperator::new(grid).unwrap();
        let h = HilbertVector::constant(op.space(), 1.0).unwrap();
        let eps = 1e-2;
        let options = SolveOptions {
            max_iterations: 1,
            ..SolveOptions::default()
        };
        let report = picard_solve_direct(&op, eps, &h, &options).unwrap();
        let h_unit = h.scaled(1.0 / h.norm(Norm::H1).unwrap());
        for (a, b) in report.solution.coeffs().iter().zip(h_unit.coeffs()) {
            assert!((a - eps * b).abs() <= 1e-14, "{a} vs {}", eps * b);
        }
        assert!((report.solution.norm(Norm::H1).unwrap() - eps).abs() <= 1e-12);
    }

    #[test]
    fn direct_solve_certified_newtonian_stays_in_ball() {
        let grid = GridDomain::unit_cube(5).unwrap();
        let op = NewtonianCubicOperator::new(grid).unwrap();
        let h = HilbertVector::constant(op.space(), 1.0).unwrap();
        let eps = 1e-2;
        let report = picard_solve_direct(&op, eps, &h, &SolveOptions::default()).unwrap();
        assert!(report.converged);
        assert!(!report.exited_ball);
        let radius = eps.cbrt().powi(2);
        assert!((report.ball_radius - radius).abs() < 1e-15);
        assert!(report.norm_solution <= radius);
        assert!(report.final_residual <= 1e-10);
    }

    #[test]
    fn direct_solve_zero_h_exploratory_fixes_zero() {
        let op = ScalarCubic::new();
        let h = HilbertVector::from_abstract(vec![0.0]).unwrap();
        let options = SolveOptions {
            mode: Mode::Exploratory,
            ..SolveOptions::default()
        };
        let report = picard_solve_direct(&op, 1e-3, &h, &options).unwrap();
        assert_eq!(report.solution.coeffs(), &[0.0]);
        assert!(report.converged);
        assert!(!report.certified_run);
    }

    #[test]
    fn direct_solve_scalar_cubic_matches_bisection() {
        let op = ScalarCubic::new();
        let h = HilbertVector::from_abstract(vec![1.0]).unwrap();
        for eps in [1e-2, 1e-3, 1e-4] {
            let options = SolveOptions {
                tol_step: Some(1e-15),
                tol_res: 1e-15,
                ..SolveOptions::default()
            };
            let report = picard_solve_direct(&op, eps, &h, &options).unwrap();
            assert!(report.converged || report.final_residual <= 1e-14);
            let f = |u: f64| u * u * u + eps * u - eps * eps;
            let root = oracle::scalar_bisection(f, 0.0, 1.0, 1e-13).unwrap();
            let gap = (report.solution.coeffs()[0] - root.value).abs();
            assert!(gap <= 1e-10, "eps = {eps}: gap {gap}");
        }
    }

    #[test]
    fn general_solve_handles_vanishing_linearization_exploratorily() {
        // same scalar cubic through the general path with w supplied directly
        let op = ScalarCubic::new();
        let eps = 1e-3;
        let w = HilbertVector::from_abstract(vec![eps]).unwrap();
        let constants = compute_theorem_constants(1.0, 6.0 * 0.1, 6.0, 0.0, eps).unwrap();
        let problem = RegularizationProblem::new(&op, eps, w, Norm::L2).unwrap();
        let options = SolveOptions {
            mode: Mode::Exploratory,
            tol_step: Some(1e-15),
            tol_res: 1e-15,
            ..SolveOptions::default()
        };
        let report = picard_solve_general(&problem, &constants, &options).unwrap();
        let f = |u: f64| u * u * u + eps * u - eps * eps;
        let root = oracle::scalar_bisection(f, 0.0, 1.0, 1e-13).unwrap();
        let gap = (report.solution.coeffs()[0] - root.value).abs();
        assert!(gap <= 1e-10, "gap {gap}");
    }

    #[test]
    fn uniqueness_from_random_starts() {
        use rand::SeedableRng;
        let (op, v, _) = family();
        let eps = 1e-2;
        let w = choose_w(&op, &v, None).unwrap();
        let constants = certified_constants(eps);
        let problem = RegularizationProblem::new(&op, eps, w, Norm::L2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut solutions = Vec::new();
        for _ in 0..5 {
            let start = crate::sampling::ball_vector(
                &crate::operator::OperatorModel::space(&op),
                Norm::L2,
                constants.r_min,
                &mut rng,
            )
            .unwrap();
            // tightened stops: the residual stop alone admits solution error
            // ~tol_res/eps in the near-null component
            let options = SolveOptions {
                start: Some(start),
                tol_step: Some(1e-13),
                tol_res: 1e-12,
                ..SolveOptions::default()
            };
            let report = picard_solve_general(&problem, &constants, &options).unwrap();
            assert!(report.converged);
            solutions.push(report.solution);
        }
        for a in &solutions {
            for b in &solutions {
                let gap = a.sub(b).unwrap().norm(Norm::L2).unwrap();
                assert!(gap <= 1e-9, "solutions differ by {gap}");
            }
        }
    }

    #[test]
    fn direct_constants_are_deterministic_and_bounded() {
        let grid = GridDomain::unit_cube(4).unwrap();
        let op = NewtonianCubicOperator::new(grid).unwrap();
        let a = estimate_direct_constants(&op, 8, 3).unwrap();
        let b = estimate_direct_constants(&op, 8, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.c1 > 0.0 && a.c2 > 0.0);
        assert!(a.epsilon_max > 0.0 && a.epsilon_max < 1.0);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            /// Every converged certified run on the quadratic family honors
            /// the residual contract and the ball, for any admissible shift
            /// direction and eps across three decades.
            #[test]
            fn certified_runs_honor_residual_and_ball(
                v1 in -0.15f64..0.15,
                v2 in -0.15f64..0.15,
                log_eps in -4.0f64..-1.0,
            ) {
                let eps = 10f64.powf(log_eps);
                let (op, _, _) = family();
                let v = HilbertVector::from_abstract(vec![v1, v2]).unwrap();
                let v_norm = v.norm(Norm::L2).unwrap();
                prop_assume!(2.0 * v_norm * 2.0 < 0.99); // strictly admissible
                let w = choose_w(&op, &v, Some((1.0, 1.0))).unwrap();
                let constants = compute_theorem_constants(1.0, 1.0, 0.0, v_norm, eps).unwrap();
                let problem = RegularizationProblem::new(&op, eps, w.clone(), Norm::L2).unwrap();
                let options = SolveOptions {
                    contraction_probes: 4,
                    ..SolveOptions::default()
                };
                let report = picard_solve_general(&problem, &constants, &options).unwrap();
                prop_assert!(report.converged);
                prop_assert!(!report.exited_ball);
                prop_assert!(report.norm_solution <= constants.r_min);
                // recompute the residual independently of the report
                let u = op.base_point().add(&report.solution).unwrap();
                let recomputed = op
                    .evaluate(&u)
                    .unwrap()
                    .axpy(eps, &u.sub(&w).unwrap())
                    .unwrap()
                    .norm(Norm::L2)
                    .unwrap();
                prop_assert!(recomputed <= options.tol_res * (1.0 + 1e-9));
                prop_assert!(report.contraction_estimate <= constants.q + 0.05);
            }
        }
    }
}
