//! Constants of the contraction argument: the admissibility product, the
//! radius window for ball invariance, the contraction factor, and the largest
//! parameter for which that factor stays below one.

use crate::error::{Error, Result};
use crate::hilbert::HilbertVector;
use crate::operator::OperatorModel;

/// Inputs and derived quantities of the certified contraction setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremConstants {
    /// Resolvent constant: ||(A + eps I)^{-1}|| <= c / eps.
    pub c: f64,
    /// Second/third derivative-norm bounds on the working ball.
    pub m2: f64,
    pub m3: f64,
    /// ||v|| where the shift element satisfies y - w = A v.
    pub v_norm: f64,
    /// Parameter the window was computed at.
    pub epsilon: f64,
    /// rho = sqrt(1 - 2 M2 ||v|| c (1 + c)); in (0, 1] when admissible.
    pub rho: f64,
    /// Ball-invariance window [R_min, R_max] = eps (1 -+ rho) / (c M2).
    pub r_min: f64,
    pub r_max: f64,
    /// Contraction factor at R = R_min: q = (c/eps)(M3 R^2/6 + M2 R).
    pub q: f64,
    /// Largest eps with q < 1; infinite when M3 = 0.
    pub epsilon_max: f64,
}

impl TheoremConstants {
    /// Strict admissibility bound on ||v|| for given c and M2.
    pub fn v_norm_bound(c: f64, m2: f64) -> f64 {
        1.0 / (2.0 * m2 * c * (1.0 + c))
    }
}

/// Evaluate the constants. Fails when the admissibility product
/// 2 M2 ||v|| c (1+c) reaches 1.
pub fn compute_theorem_constants(
    c: f64,
    m2: f64,
    m3: f64,
    v_norm: f64,
    epsilon: f64,
) -> Result<TheoremConstants> {
    if !(c >= 0.0 && m2 > 0.0 && m3 >= 0.0 && v_norm >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "constants need c, M3, ||v|| >= 0 and M2 > 0 (got c={c}, m2={m2}, m3={m3}, v_norm={v_norm})"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let product = 2.0 * m2 * v_norm * c * (1.0 + c);
    if product >= 1.0 {
        return Err(Error::Admissibility { product });
    }
    let rho = (1.0 - product).sqrt();
    let r_min = epsilon * (1.0 - rho) / (c * m2);
    let r_max = epsilon * (1.0 + rho) / (c * m2);
    let q = (c / epsilon) * (m3 * r_min * r_min / 6.0 + m2 * r_min);
    // q(eps) = (1 - rho) + eps * M3 (1 - rho)^2 / (6 c M2^2) < 1
    let epsilon_max = if m3 == 0.0 || rho == 1.0 {
        f64::INFINITY
    } else {
        6.0 * c * m2 * m2 * rho / (m3 * (1.0 - rho) * (1.0 - rho))
    };
    Ok(TheoremConstants {
        c,
        m2,
        m3,
        v_norm,
        epsilon,
        rho,
        r_min,
        r_max,
        q,
        epsilon_max,
    })
}

/// Construct the shift element w = y - A v for a chosen direction v.
/// Warns (does not fail) when ||v|| exceeds the admissibility bound, since
/// exploratory runs beyond the certified range are still useful.
pub fn choose_w(
    op: &dyn OperatorModel,
    v: &HilbertVector,
    bound_check: Option<(f64, f64)>,
) -> Result<HilbertVector> {
    let y = op.base_point();
    let av = op.derivative_apply(&y, v)?;
    if let Some((c, m2)) = bound_check {
        if c > 0.0 && m2 > 0.0 {
            let bound = TheoremConstants::v_norm_bound(c, m2);
            let v_norm = v.norm(op.natural_norm())?;
            if v_norm >= bound {
                log::warn!(
                    "||v|| = {v_norm:.6e} is not below the admissibility bound {bound:.6e}; \
                     the constructed w is only usable in exploratory mode"
                );
            }
        }
    }
    y.sub(&av)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDomain;
    use crate::operator::{MatrixQuadratic, NewtonianCubicOperator};

    #[test]
    fn worked_constants_example() {
        let k = compute_theorem_constants(1.0, 1.0, 0.0, 0.1, 0.01).unwrap();
        assert!((k.rho - 0.6f64.sqrt()).abs() < 1e-15);
        assert!((k.r_min - 2.254033e-3).abs() < 1e-8);
        assert!((k.r_max - 1.774597e-2).abs() < 1e-7);
        assert!((k.q - 0.225403).abs() < 1e-6);
        assert!(k.epsilon_max.is_infinite());
        assert!(k.r_min <= k.r_max);
    }

    #[test]
    fn degenerate_direction_gives_zero_radius() {
        let k = compute_theorem_constants(1.0, 1.0, 2.0, 0.0, 0.05).unwrap();
        assert_eq!(k.rho, 1.0);
        assert_eq!(k.r_min, 0.0);
        assert_eq!(k.q, 0.0);
    }

    #[test]
    fn admissibility_violation_reports_product() {
        let err = compute_theorem_constants(1.0, 1.0, 0.0, 0.5, 0.01).unwrap_err();
        match err {
            Error::Admissibility { product } => assert!((product - 2.0).abs() < 1e-15),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn q_stays_below_one_up_to_epsilon_max() {
        let c = 1.3;
        let m2 = 0.8;
        let m3 = 2.0;
        let v_norm = 0.05;
        let k = compute_theorem_constants(c, m2, m3, v_norm, 1e-3).unwrap();
        assert!(k.q < 1.0);
        let at_max = compute_theorem_constants(c, m2, m3, v_norm, k.epsilon_max * 0.999).unwrap();
        assert!(at_max.q < 1.0);
        let beyond = compute_theorem_constants(c, m2, m3, v_norm, k.epsilon_max * 1.01).unwrap();
        assert!(beyond.q > 1.0);
    }

    #[test]
    fn choose_w_applies_the_linearization() {
        let op = MatrixQuadratic::diagonal(&[0.0, 1.0]).unwrap();
        let v = HilbertVector::from_abstract(vec![0.3, 0.1]).unwrap();
        let w = choose_w(&op, &v, Some((1.0, 1.0))).unwrap();
        assert_eq!(w.coeffs(), &[0.0, -0.1]);
    }

    #[test]
    fn choose_w_with_vanishing_linearization_returns_base_point() {
        let grid = GridDomain::unit_cube(4).unwrap();
        let op = NewtonianCubicOperator::new(grid).unwrap();
        let v = HilbertVector::constant(op.space(), 0.7).unwrap();
        let w = choose_w(&op, &v, None).unwrap();
        assert!(w.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn choose_w_zero_direction_returns_base_point() {
        let op = MatrixQuadratic::diagonal(&[0.0, 1.0]).unwrap();
        let v = HilbertVector::from_abstract(vec![0.0, 0.0]).unwrap();
        let w = choose_w(&op, &v, None).unwrap();
        assert_eq!(w.coeffs(), &[0.0, 0.0]);
    }
}
