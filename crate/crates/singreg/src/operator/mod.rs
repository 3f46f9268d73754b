//! Nonlinear operator abstraction with derivative access, Taylor-remainder
//! machinery, and empirical derivative-norm bounds, plus the concrete
//! instances used by the solvers and experiments.

mod matrix;
mod newtonian;
mod scalar;

pub use matrix::MatrixQuadratic;
pub use newtonian::NewtonianCubicOperator;
pub use scalar::ScalarCubic;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::{HilbertVector, Norm, SpaceTag};
use crate::linalg::DenseMatrix;
use crate::sampling;

/// Default tolerance certifying that the base point is a root, ||F(y)|| <= tol.
pub const ROOT_TOLERANCE: f64 = 1e-10;

/// Safety factor applied to sampled derivative-norm suprema.
pub const BOUND_SAFETY_FACTOR: f64 = 1.25;

/// Nonlinear map F on a discrete Hilbert space, with directional derivative
/// access and a certified root `y` (the base point).
pub trait OperatorModel: Send + Sync {
    /// Space the operator acts on.
    fn space(&self) -> SpaceTag;

    /// Norm of the ambient Hilbert space for this instance (L2 for the
    /// finite-dimensional test operators, H1 for the Newtonian one).
    fn natural_norm(&self) -> Norm {
        Norm::L2
    }

    /// F(u).
    fn evaluate(&self, u: &HilbertVector) -> Result<HilbertVector>;

    /// F'(u) psi, linear in psi.
    fn derivative_apply(&self, u: &HilbertVector, psi: &HilbertVector) -> Result<HilbertVector>;

    /// The certified root y with F(y) = 0.
    fn base_point(&self) -> HilbertVector {
        HilbertVector::zeros(self.space())
    }

    /// Analytic derivative-norm bounds (M2(R), M3(R)) when the instance knows
    /// them; estimated otherwise.
    fn analytic_bounds(&self, _radius: f64) -> Option<(f64, f64)> {
        None
    }

    /// Whether the linearization at the base point is symmetric positive
    /// semidefinite; gates the conjugate-gradient path of the shifted solves.
    fn linearization_is_psd(&self) -> bool {
        false
    }

    fn dim(&self) -> usize {
        self.space().dim()
    }
}

/// Taylor remainder K(z) = F(y + z) - F(y) - F'(y) z at the base point.
pub fn taylor_remainder(op: &dyn OperatorModel, z: &HilbertVector) -> Result<HilbertVector> {
    let y = op.base_point();
    let fy = op.evaluate(&y)?;
    let f_yz = op.evaluate(&y.add(z)?)?;
    let az = op.derivative_apply(&y, z)?;
    f_yz.sub(&fy)?.sub(&az)
}

/// Sampled suprema of second/third directional-difference quotients over the
/// ball B(y, radius), inflated by the safety factor. Values below 1e-12 are
/// clamped to zero (float noise on genuinely linear maps).
pub fn sample_derivative_bounds(
    op: &dyn OperatorModel,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if radius <= 0.0 {
        return Err(Error::InvalidInput("bound radius must be positive".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let norm = op.natural_norm();
    let space = op.space();
    let y = op.base_point();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // central-difference step balancing truncation against round-off
    let t = 1e-4 * radius;
    let mut m2: f64 = 0.0;
    let mut m3: f64 = 0.0;
    let mut f_scale: f64 = 0.0;
    for _ in 0..samples {
        let u = y.add(&sampling::ball_vector(&space, norm, radius, &mut rng)?)?;
        let psi = sampling::unit_vector(&space, norm, &mut rng)?;
        let f_p2 = op.evaluate(&u.axpy(2.0 * t, &psi)?)?;
        let f_p1 = op.evaluate(&u.axpy(t, &psi)?)?;
        let f_0 = op.evaluate(&u)?;
        let f_m1 = op.evaluate(&u.axpy(-t, &psi)?)?;
        let f_m2 = op.evaluate(&u.axpy(-2.0 * t, &psi)?)?;
        f_scale = f_scale.max(f_0.norm(norm)?);
        // second difference: F(u+t) - 2F(u) + F(u-t)
        let d2 = f_p1.add(&f_m1)?.axpy(-2.0, &f_0)?;
        m2 = m2.max(d2.norm(norm)? / (t * t));
        // third difference: F(u+2t) - 2F(u+t) + 2F(u-t) - F(u-2t)
        let d3 = f_p2.axpy(-2.0, &f_p1)?.axpy(2.0, &f_m1)?.sub(&f_m2)?;
        m3 = m3.max(d3.norm(norm)? / (2.0 * t * t * t));
    }
    m2 *= BOUND_SAFETY_FACTOR;
    m3 *= BOUND_SAFETY_FACTOR;
    // difference quotients of a linear map leave pure cancellation noise,
    // eps_mach * ||F|| divided by the step powers; clamp below that floor
    let noise2 = 64.0 * f64::EPSILON * f_scale / (t * t);
    let noise3 = 64.0 * f64::EPSILON * f_scale / (2.0 * t * t * t);
    if m2 < noise2.max(1e-12) {
        m2 = 0.0;
    }
    if m3 < noise3.max(1e-12) {
        m3 = 0.0;
    }
    Ok((m2, m3))
}

/// Derivative-norm bounds (M2, M3) on B(y, radius): analytic bounds pass
/// through untouched when the instance supplies them, otherwise sampled.
pub fn estimate_derivative_bounds(
    op: &dyn OperatorModel,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if let Some(bounds) = op.analytic_bounds(radius) {
        return Ok(bounds);
    }
    sample_derivative_bounds(op, radius, samples, seed)
}

/// Materialize the linearization F'(at) as a dense matrix by applying the
/// derivative to the coordinate basis. Intended for desk-scale dimensions.
pub fn materialize_linearization(
    op: &dyn OperatorModel,
    at: &HilbertVector,
) -> Result<DenseMatrix> {
    let n = op.dim();
    let space = op.space();
    let mut m = DenseMatrix::zeros(n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let basis = HilbertVector::new(space, e.clone())?;
        let col = op.derivative_apply(at, &basis)?;
        for (i, v) in col.coeffs().iter().enumerate() {
            m[(i, j)] = *v;
        }
        e[j] = 0.0;
    }
    Ok(m)
}

/// Sampled sanity checks of the operator contract: the base point is a root
/// and the derivative is linear in its direction argument.
pub fn check_operator(op: &dyn OperatorModel, seed: u64) -> Result<()> {
    let norm = op.natural_norm();
    let y = op.base_point();
    let root_norm = op.evaluate(&y)?.norm(norm)?;
    if root_norm > ROOT_TOLERANCE {
        return Err(Error::Precondition(format!(
            "base point is not a root: ||F(y)|| = {root_norm:.3e} > {ROOT_TOLERANCE:.1e}"
        )));
    }
    let space = op.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..4 {
        let u = sampling::ball_vector(&space, norm, 1.0, &mut rng)?;
        let a = sampling::unit_vector(&space, norm, &mut rng)?;
        let b = sampling::unit_vector(&space, norm, &mut rng)?;
        let alpha = 0.7;
        let lhs = op.derivative_apply(&u, &a.axpy(alpha, &b)?)?;
        let rhs = op
            .derivative_apply(&u, &a)?
            .axpy(alpha, &op.derivative_apply(&u, &b)?)?;
        let defect = lhs.sub(&rhs)?.norm(norm)?;
        let scale = 1.0 + lhs.norm(norm)?;
        if defect > 1e-8 * scale {
            return Err(Error::Precondition(format!(
                "derivative_apply is not linear in psi: defect {defect:.3e}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDomain;

    fn linear_op(diag: Vec<f64>) -> MatrixQuadratic {
        let n = diag.len();
        let mut a = DenseMatrix::zeros(n);
        for (i, d) in diag.iter().enumerate() {
            a[(i, i)] = *d;
        }
        MatrixQuadratic::linear(a).unwrap()
    }

    #[test]
    fn taylor_remainder_vanishes_for_linear_maps() {
        let op = linear_op(vec![2.0, -1.0, 0.5]);
        let z = HilbertVector::from_abstract(vec![0.3, -0.4, 1.1]).unwrap();
        let k = taylor_remainder(&op, &z).unwrap();
        assert!(k.norm(Norm::L2).unwrap() < 1e-14);
    }

    #[test]
    fn taylor_remainder_of_scalar_square_is_z_squared() {
        // F(u) = u^2 as a 1x1 quadratic map: K(z) = z^2 with M2 = 2 equality
        let op = MatrixQuadratic::new(DenseMatrix::zeros(1), vec![1.0], Some(2.0), false).unwrap();
        let z = HilbertVector::from_abstract(vec![0.7]).unwrap();
        let k = taylor_remainder(&op, &z).unwrap();
        assert!((k.coeffs()[0] - 0.49).abs() < 1e-15);
        let (m2, _m3) = estimate_derivative_bounds(&op, 1.0, 10, 0).unwrap();
        assert_eq!(m2, 2.0, "analytic bound passes through untouched");
        let bound = m2 * 0.49 / 2.0;
        assert!(k.norm(Norm::L2).unwrap() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn sampled_bounds_vanish_for_linear_maps() {
        let op = linear_op(vec![1.0, 3.0]);
        let (m2, m3) = sample_derivative_bounds(&op, 2.0, 32, 1).unwrap();
        assert_eq!(m2, 0.0);
        assert_eq!(m3, 0.0);
    }

    #[test]
    fn sampled_bounds_match_scalar_cubic_analytics() {
        // F(u) = u^3 on [-R, R]: M2 = 6R, M3 = 6
        let op = ScalarCubic::new();
        let radius = 0.8;
        let (m2, m3) = sample_derivative_bounds(&op, radius, 400, 7).unwrap();
        let (m2_true, m3_true) = (6.0 * radius, 6.0);
        assert!(
            (m2 - m2_true).abs() / m2_true < 0.3,
            "M2 estimate {m2} vs {m2_true}"
        );
        assert!(
            (m3 - m3_true).abs() / m3_true < 0.3,
            "M3 estimate {m3} vs {m3_true}"
        );
    }

    #[test]
    fn materialized_linearization_matches_matrix() {
        let mut a = DenseMatrix::zeros(2);
        a[(0, 1)] = 4.0;
        a[(1, 0)] = -2.0;
        let op = MatrixQuadratic::linear(a.clone()).unwrap();
        let m = materialize_linearization(&op, &op.base_point()).unwrap();
        assert_eq!(m, a);
    }

    #[test]
    fn operator_contract_checks_pass_for_instances() {
        check_operator(&ScalarCubic::new(), 3).unwrap();
        check_operator(&linear_op(vec![0.0, 1.0]), 3).unwrap();
        let grid = GridDomain::unit_cube(5).unwrap();
        check_operator(&NewtonianCubicOperator::new(grid).unwrap(), 3).unwrap();
    }
}
