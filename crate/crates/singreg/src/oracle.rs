//! Independent brute-force reference solvers used to validate the main
//! solver: scalar bisection, dense damped Newton, and refined-grid quadrature
//! of the Newtonian potential.
//!
//! These deliberately share no numerical kernels with the solver paths: the
//! Newton oracle carries its own Gaussian elimination, and the quadrature
//! oracle uses midpoint cells instead of trapezoidal nodes (which also keeps
//! the evaluation point away from the kernel singularity).

use crate::error::{Error, Result};
use crate::grid::GridDomain;
use crate::hilbert::{HilbertVector, Norm};
use crate::operator::OperatorModel;

/// How an oracle value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Bisection,
    Newton,
    RefinedQuadrature,
}

/// Value plus a certified error radius, documented per method: bisection
/// reports the final bracket width, Newton the final residual, quadrature a
/// Richardson estimate from two refinement levels.
#[derive(Debug, Clone)]
pub struct OracleResult<T> {
    pub value: T,
    pub certified_error: f64,
    pub method: OracleMethod,
    /// False when the method finished without meeting its own target
    /// (e.g. Newton divergence); the value is then best-effort only.
    pub certified: bool,
}

/// Bisection on a sign-changing bracket. The iteration count never exceeds
/// ceil(log2((hi - lo)/tol)).
pub fn scalar_bisection(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<OracleResult<f64>> {
    if !(lo < hi) || tol <= 0.0 {
        return Err(Error::InvalidInput(
            "bisection needs lo < hi and tol > 0".into(),
        ));
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(OracleResult {
            value: lo,
            certified_error: 0.0,
            method: OracleMethod::Bisection,
            certified: true,
        });
    }
    if f_hi == 0.0 {
        return Ok(OracleResult {
            value: hi,
            certified_error: 0.0,
            method: OracleMethod::Bisection,
            certified: true,
        });
    }
    if f_lo * f_hi > 0.0 {
        return Err(Error::Bracket {
            lo,
            hi,
            product: f_lo * f_hi,
        });
    }
    let (mut lo, mut hi, mut f_lo) = (lo, hi, f_lo);
    let max_iters = ((hi - lo) / tol).log2().ceil().max(1.0) as usize;
    let mut iterations = 0;
    while hi - lo > tol && iterations < max_iters {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(OracleResult {
                value: mid,
                certified_error: 0.0,
                method: OracleMethod::Bisection,
                certified: true,
            });
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
        iterations += 1;
    }
    Ok(OracleResult {
        value: 0.5 * (lo + hi),
        certified_error: hi - lo,
        method: OracleMethod::Bisection,
        certified: true,
    })
}

/// Gaussian elimination with partial pivoting, written here so the oracle
/// does not share the solver's factorization path.
fn gauss_solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let mut p = k;
        let mut best = a[k][k].abs();
        for i in (k + 1)..n {
            if a[i][k].abs() > best {
                best = a[i][k].abs();
                p = i;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(Error::SingularJacobian { iteration: k });
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in (k + 1)..n {
            let factor = a[i][k] / a[k][k];
            if factor == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= factor * a[k][j];
            }
            b[i] -= factor * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in (i + 1)..n {
            acc -= a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
    }
    Ok(x)
}

/// Damped Newton iteration on G(u) = F(u) + eps (u - w) with dense Jacobian
/// solves; step halving on residual increase, at most 60 halvings.
/// Divergence is reported honestly via `certified = false`.
pub fn dense_newton(
    op: &dyn OperatorModel,
    eps: f64,
    w: &HilbertVector,
    start: &HilbertVector,
    tol: f64,
) -> Result<OracleResult<HilbertVector>> {
    let n = op.dim();
    if n > 1000 {
        return Err(Error::Oracle(format!(
            "dense Newton oracle is limited to dimension 1000, got {n}"
        )));
    }
    let space = op.space();
    let residual = |u: &HilbertVector| -> Result<HilbertVector> {
        // G(u) = F(u) + eps (u - w)
        op.evaluate(u)?.axpy(eps, &u.sub(w)?)
    };
    let mut u = start.clone();
    let mut r = residual(&u)?;
    let mut r_norm = r.norm(Norm::L2)?;
    let max_newton = 200;
    for it in 0..max_newton {
        if r_norm <= tol {
            return Ok(OracleResult {
                value: u,
                certified_error: r_norm,
                method: OracleMethod::Newton,
                certified: true,
            });
        }
        // materialize J = F'(u) + eps I column by column
        let mut jac: Vec<Vec<f64>> = vec![vec![0.0; n]; n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let basis = HilbertVector::new(space, e.clone())?;
            let col = op.derivative_apply(&u, &basis)?;
            for i in 0..n {
                jac[i][j] = col.coeffs()[i];
            }
            jac[j][j] += eps;
            e[j] = 0.0;
        }
        let mut rhs: Vec<f64> = r.coeffs().to_vec();
        let step = match gauss_solve(&mut jac, &mut rhs) {
            Ok(s) => HilbertVector::new(space, s)?,
            Err(Error::SingularJacobian { .. }) => {
                return Err(Error::SingularJacobian { iteration: it })
            }
            Err(e) => return Err(e),
        };
        // damped update: halve until the residual decreases
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let candidate = u.axpy(-lambda, &step)?;
            if !candidate.is_finite() {
                lambda *= 0.5;
                continue;
            }
            let r_new = residual(&candidate)?;
            let r_new_norm = r_new.norm(Norm::L2)?;
            if r_new_norm < r_norm {
                u = candidate;
                r = r_new;
                r_norm = r_new_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Ok(OracleResult {
                value: u,
                certified_error: r_norm,
                method: OracleMethod::Newton,
                certified: false,
            });
        }
    }
    let certified = r_norm <= tol;
    Ok(OracleResult {
        value: u,
        certified_error: r_norm,
        method: OracleMethod::Newton,
        certified,
    })
}

/// Refined-grid midpoint quadrature of the Newtonian potential of a scalar
/// field, evaluated at one point:
///   I(x) = integral over the box of f(s) / (4 pi |x - s|) ds.
///
/// Two refinement levels (factor and 2*factor) give a Richardson error
/// estimate. The refined cell count is capped at 64^3.
pub fn refined_quadrature(
    domain: &GridDomain,
    integrand: &dyn Fn([f64; 3]) -> f64,
    at: [f64; 3],
    refinement: usize,
) -> Result<OracleResult<f64>> {
    if refinement < 2 {
        return Err(Error::InvalidInput("refinement must be >= 2".into()));
    }
    let levels = [refinement, 2 * refinement];
    for &level in &levels {
        let cells_per_axis = domain
            .points()
            .iter()
            .map(|&p| (p - 1) * level)
            .max()
            .unwrap_or(0);
        if cells_per_axis > 64 {
            return Err(Error::Oracle(format!(
                "refined grid would have {cells_per_axis} cells per axis; cap is 64"
            )));
        }
    }
    let coarse = midpoint_potential(domain, integrand, at, levels[0]);
    let fine = midpoint_potential(domain, integrand, at, levels[1]);
    // midpoint rule is second order; Richardson with p = 2
    let certified_error = (fine - coarse).abs() / 3.0;
    Ok(OracleResult {
        value: fine,
        certified_error,
        method: OracleMethod::RefinedQuadrature,
        certified: true,
    })
}

fn midpoint_potential(
    domain: &GridDomain,
    integrand: &dyn Fn([f64; 3]) -> f64,
    at: [f64; 3],
    level: usize,
) -> f64 {
    let lower = domain.lower();
    let points = domain.points();
    let cells = [
        (points[0] - 1) * level,
        (points[1] - 1) * level,
        (points[2] - 1) * level,
    ];
    let h = [
        domain.edges()[0] / cells[0] as f64,
        domain.edges()[1] / cells[1] as f64,
        domain.edges()[2] / cells[2] as f64,
    ];
    let cell_volume = h[0] * h[1] * h[2];
    let mut acc = 0.0;
    for iz in 0..cells[2] {
        let sz = lower[2] + (iz as f64 + 0.5) * h[2];
        for iy in 0..cells[1] {
            let sy = lower[1] + (iy as f64 + 0.5) * h[1];
            for ix in 0..cells[0] {
                let sx = lower[0] + (ix as f64 + 0.5) * h[0];
                let dx = at[0] - sx;
                let dy = at[1] - sy;
                let dz = at[2] - sz;
                let r = (dx * dx + dy * dy + dz * dz).sqrt();
                acc += integrand([sx, sy, sz]) * cell_volume / (4.0 * std::f64::consts::PI * r);
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::operator::MatrixQuadratic;

    #[test]
    fn bisection_solves_the_scalar_cubic_instance() {
        // u^3 + eps*u - eps^2 = 0 has its root near eps*(1 - eps)
        let eps = 1e-3;
        let f = |u: f64| u * u * u + eps * u - eps * eps;
        let r = scalar_bisection(f, 0.0, 1.0, 1e-12).unwrap();
        assert!(r.certified_error <= 1e-12);
        assert!(f(r.value).abs() <= 1e-14, "residual {}", f(r.value));
        // series expansion: u = eps (1 - eps + O(eps^2))
        assert!((r.value - 9.99001e-4).abs() < 1e-8, "root {}", r.value);
    }

    #[test]
    fn bisection_trivial_roots() {
        let r = scalar_bisection(|u| u, -1.0, 1.0, 1e-12).unwrap();
        assert!(r.value.abs() <= 1e-12);
        let r = scalar_bisection(|u| u - 0.5, 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn bisection_requires_sign_change() {
        let err = scalar_bisection(|u| u * u + 1.0, -1.0, 1.0, 1e-6).unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
    }

    #[test]
    fn bisection_iteration_budget_is_logarithmic() {
        // indirectly: bracket width after the run honors tol and a counter
        // bounded by ceil(log2(range/tol)) was enough to get there
        let r = scalar_bisection(|u| u - 0.237, 0.0, 1.0, 1e-9).unwrap();
        assert!(r.certified_error <= 1e-9);
        assert!((r.value - 0.237).abs() <= 1e-9);
    }

    #[test]
    fn newton_is_exact_on_linear_maps() {
        // F(u) = u, w = 0: G(u) = (1 + eps) u, one step to zero
        let op = MatrixQuadratic::linear(DenseMatrix::identity(3)).unwrap();
        let w = HilbertVector::from_abstract(vec![0.0; 3]).unwrap();
        let start = HilbertVector::from_abstract(vec![0.3, -0.7, 2.0]).unwrap();
        let r = dense_newton(&op, 0.5, &w, &start, 1e-13).unwrap();
        assert!(r.certified);
        assert!(r.value.norm(Norm::L2).unwrap() <= 1e-13);
    }

    #[test]
    fn newton_matches_bisection_on_scalar_cubic() {
        use crate::operator::ScalarCubic;
        let eps = 1e-3;
        let op = ScalarCubic::new();
        let w = HilbertVector::from_abstract(vec![eps]).unwrap();
        let start = HilbertVector::from_abstract(vec![0.0]).unwrap();
        let newton = dense_newton(&op, eps, &w, &start, 1e-13).unwrap();
        assert!(newton.certified);
        let f = |u: f64| u * u * u + eps * u - eps * eps;
        let bis = scalar_bisection(f, 0.0, 1.0, 1e-13).unwrap();
        assert!((newton.value.coeffs()[0] - bis.value).abs() <= 1e-10);
    }

    #[test]
    fn newton_reports_singular_jacobian() {
        // F(u) = -eps*u makes F'(u) + eps*I identically zero
        let mut a = DenseMatrix::zeros(2);
        a[(0, 0)] = -0.5;
        a[(1, 1)] = -0.5;
        let op = MatrixQuadratic::linear(a).unwrap();
        let w = HilbertVector::from_abstract(vec![1.0, 0.0]).unwrap();
        let start = HilbertVector::from_abstract(vec![0.2, 0.2]).unwrap();
        let err = dense_newton(&op, 0.5, &w, &start, 1e-12).unwrap_err();
        assert!(matches!(err, Error::SingularJacobian { .. }));
    }

    #[test]
    fn quadrature_of_zero_field_is_zero() {
        let g = GridDomain::unit_cube(5).unwrap();
        let r = refined_quadrature(&g, &|_| 0.0, [0.5, 0.5, 0.5], 2).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.certified_error, 0.0);
    }

    #[test]
    fn quadrature_self_consistent_for_unit_density() {
        let g = GridDomain::unit_cube(5).unwrap();
        let a = refined_quadrature(&g, &|_| 1.0, [0.5, 0.5, 0.5], 3).unwrap();
        let b = refined_quadrature(&g, &|_| 1.0, [0.5, 0.5, 0.5], 6).unwrap();
        assert!(
            (a.value - b.value).abs() <= (a.certified_error + b.certified_error) * 4.0,
            "levels disagree beyond their Richardson estimates: {} vs {}",
            a.value,
            b.value
        );
    }

    #[test]
    fn quadrature_is_translation_invariant() {
        let shift = [0.25, -1.5, 3.0];
        let g0 = GridDomain::unit_cube(5).unwrap();
        let g1 = GridDomain::new([shift[0], shift[1], shift[2]], [1.0; 3], [5, 5, 5]).unwrap();
        let p0 = [0.3, 0.4, 0.6];
        let p1 = [p0[0] + shift[0], p0[1] + shift[1], p0[2] + shift[2]];
        let a = refined_quadrature(&g0, &|_| 1.0, p0, 3).unwrap();
        let b = refined_quadrature(&g1, &|_| 1.0, p1, 3).unwrap();
        assert!((a.value - b.value).abs() <= 1e-12);
    }

    #[test]
    fn quadrature_memory_guard_trips() {
        let g = GridDomain::unit_cube(20).unwrap();
        let err = refined_quadrature(&g, &|_| 1.0, [0.5; 3], 4).unwrap_err();
        assert!(matches!(err, Error::Oracle(_)));
    }
}
