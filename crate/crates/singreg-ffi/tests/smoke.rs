//! Exercises the C entry points from Rust: handle lifecycle, constants,
//! both solve paths, resolvent estimation, rate fitting, and the error
//! message channel.

use singreg_ffi::*;

#[test]
fn operator_lifecycle_and_dim() {
    unsafe {
        let mut op: *mut SrOperator = std::ptr::null_mut();
        assert_eq!(sr_operator_scalar_cubic(&mut op), SrStatus::Ok);
        assert_eq!(sr_operator_dim(op), 1);
        sr_operator_free(op);
        sr_operator_free(std::ptr::null_mut()); // no-op
    }
}

#[test]
fn theorem_constants_match_worked_example() {
    unsafe {
        let mut k = std::mem::zeroed::<SrTheoremConstants>();
        assert_eq!(
            sr_theorem_constants(1.0, 1.0, 0.0, 0.1, 0.01, &mut k),
            SrStatus::Ok
        );
        assert!((k.rho - 0.6f64.sqrt()).abs() < 1e-15);
        assert!((k.r_min - 2.254033e-3).abs() < 1e-8);
        assert!((k.q - 0.225403).abs() < 1e-6);
        assert!(k.epsilon_max.is_infinite());
    }
}

#[test]
fn admissibility_violation_reports_error_message() {
    unsafe {
        let mut k = std::mem::zeroed::<SrTheoremConstants>();
        assert_eq!(
            sr_theorem_constants(1.0, 1.0, 0.0, 0.5, 0.01, &mut k),
            SrStatus::Admissibility
        );
        let needed = sr_last_error_message(std::ptr::null_mut(), 0);
        assert!(needed > 0);
        let mut buf = vec![0i8; needed + 1];
        let written = sr_last_error_message(buf.as_mut_ptr(), buf.len());
        assert_eq!(written, needed);
        let message = std::ffi::CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        assert!(message.contains("admissibility"), "{message}");
    }
}

#[test]
fn direct_solve_newtonian_through_ffi() {
    unsafe {
        let lower = [0.0f64; 3];
        let edges = [1.0f64; 3];
        let points = [5usize; 3];
        let mut op: *mut SrOperator = std::ptr::null_mut();
        assert_eq!(
            sr_operator_newtonian_cubic(lower.as_ptr(), edges.as_ptr(), points.as_ptr(), &mut op),
            SrStatus::Ok
        );
        let dim = sr_operator_dim(op);
        assert_eq!(dim, 125);
        let h = vec![1.0f64; dim];
        let mut summary = std::mem::zeroed::<SrSolveSummary>();
        let mut solution = vec![0.0f64; dim];
        let eps = 0.01;
        let status = sr_solve_direct(
            op,
            eps,
            h.as_ptr(),
            SrMode::Certified,
            42,
            &mut summary,
            solution.as_mut_ptr(),
        );
        assert_eq!(status, SrStatus::Ok);
        assert!(summary.converged);
        assert!(!summary.exited_ball);
        assert!(summary.certified_run);
        let radius = eps.cbrt().powi(2);
        assert!((summary.ball_radius - radius).abs() < 1e-15);
        assert!(summary.norm_solution <= radius);
        assert!(solution.iter().any(|&x| x != 0.0));
        // certified range is enforced through the FFI too
        let status = sr_solve_direct(
            op,
            0.9,
            h.as_ptr(),
            SrMode::Certified,
            42,
            &mut summary,
            std::ptr::null_mut(),
        );
        assert_eq!(status, SrStatus::Precondition);
        sr_operator_free(op);
    }
}

#[test]
fn choose_w_applies_linearization() {
    unsafe {
        let matrix = [0.0, 0.0, 0.0, 1.0];
        let quadratic = [0.0f64; 8];
        let mut op: *mut SrOperator = std::ptr::null_mut();
        assert_eq!(
            sr_operator_matrix_quadratic(
                2,
                matrix.as_ptr(),
                quadratic.as_ptr(),
                0.0,
                true,
                &mut op
            ),
            SrStatus::Ok
        );
        let v = [0.3, 0.1];
        let mut w = [99.0, 99.0];
        assert_eq!(sr_choose_w(op, v.as_ptr(), w.as_mut_ptr()), SrStatus::Ok);
        assert_eq!(w, [0.0, -0.1]);
        sr_operator_free(op);
    }
}

#[test]
fn general_solve_matrix_quadratic_through_ffi() {
    unsafe {
        // A = diag(0, 1), F_i += 0.5 u_i^2, w = (0, -0.1) from v = (0.05, 0.1)
        let matrix = [0.0, 0.0, 0.0, 1.0];
        let mut quadratic = [0.0f64; 8];
        quadratic[0] = 0.5;
        quadratic[7] = 0.5;
        let mut op: *mut SrOperator = std::ptr::null_mut();
        assert_eq!(
            sr_operator_matrix_quadratic(
                2,
                matrix.as_ptr(),
                quadratic.as_ptr(),
                1.0,
                true,
                &mut op
            ),
            SrStatus::Ok
        );
        let w = [0.0, -0.1];
        let v_norm = (0.05f64 * 0.05 + 0.1 * 0.1).sqrt();
        let mut summary = std::mem::zeroed::<SrSolveSummary>();
        let mut solution = [0.0f64; 2];
        let status = sr_solve_general(
            op,
            0.01,
            w.as_ptr(),
            1.0,
            1.0,
            0.0,
            v_norm,
            SrMode::Certified,
            42,
            &mut summary,
            solution.as_mut_ptr(),
        );
        assert_eq!(status, SrStatus::Ok);
        assert!(summary.converged && !summary.exited_ball);
        // z2 ~ -eps * 0.1 / (1 + eps)
        assert!((solution[1] + 0.001 * 0.1 / 1.01 * 10.0).abs() < 1e-4);
        assert!(solution[0].abs() < 1e-12);
        sr_operator_free(op);
    }
}

#[test]
fn resolvent_and_rate_fit_through_ffi() {
    unsafe {
        let matrix = [0.0, 0.0, 0.0, 1.0];
        let quadratic = [0.0f64; 8];
        let mut op: *mut SrOperator = std::ptr::null_mut();
        assert_eq!(
            sr_operator_matrix_quadratic(
                2,
                matrix.as_ptr(),
                quadratic.as_ptr(),
                0.0,
                true,
                &mut op
            ),
            SrStatus::Ok
        );
        let eps = [1e-1, 1e-2, 1e-3];
        let mut c = 0.0f64;
        let mut low_confidence = true;
        assert_eq!(
            sr_resolvent_constant(op, eps.as_ptr(), eps.len(), &mut c, &mut low_confidence),
            SrStatus::Ok
        );
        assert!((c - 1.0).abs() <= 1e-8);
        assert!(!low_confidence);
        sr_operator_free(op);

        let values = [3e-1, 3e-2, 3e-3];
        let mut fit = std::mem::zeroed::<SrRateFit>();
        assert_eq!(
            sr_fit_rate(eps.as_ptr(), values.as_ptr(), 3, &mut fit),
            SrStatus::Ok
        );
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert_eq!(fit.points_used, 3);
        // too few positive values
        let bad = [0.0, -1.0, 2.0];
        assert_eq!(
            sr_fit_rate(eps.as_ptr(), bad.as_ptr(), 3, &mut fit),
            SrStatus::NoFit
        );
    }
}

#[test]
fn null_pointers_are_rejected() {
    unsafe {
        let mut op: *mut SrOperator = std::ptr::null_mut();
        assert_eq!(
            sr_operator_newtonian_cubic(
                std::ptr::null(),
                std::ptr::null(),
                std::ptr::null(),
                &mut op
            ),
            SrStatus::NullPointer
        );
        assert_eq!(sr_operator_dim(std::ptr::null()), 0);
        let mut summary = std::mem::zeroed::<SrSolveSummary>();
        assert_eq!(
            sr_solve_direct(
                std::ptr::null(),
                0.01,
                std::ptr::null(),
                SrMode::Certified,
                0,
                &mut summary,
                std::ptr::null_mut()
            ),
            SrStatus::NullPointer
        );
    }
}

#[test]
fn format_helper_matches_csv_convention() {
    unsafe {
        let mut buf = vec![0i8; 64];
        let n = sr_format_f64(0.01, buf.as_mut_ptr(), buf.len());
        let text = std::ffi::CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        assert_eq!(text.len(), n);
        assert_eq!(text, "1.0000000000000000e-2");
    }
}
