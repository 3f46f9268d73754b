//! Finite-dimensional test operator F(u) = A u + B(u, u) with a dense matrix
//! A and a symmetric quadratic tensor B.

use crate::error::{Error, Result};
use crate::hilbert::{HilbertVector, SpaceTag};
use crate::linalg::DenseMatrix;

use super::OperatorModel;

/// F(u) = A u + B(u, u), base point y = 0 (so F(0) = 0 and F'(0) = A).
///
/// The tensor is stored dense as `b[i*n*n + j*n + k]` and symmetrized in the
/// trailing pair at construction. The second derivative is the constant
/// bilinear map 2B, so an analytic M2 (when supplied) holds on every ball and
/// the analytic M3 is exactly zero.
#[derive(Debug, Clone)]
pub struct MatrixQuadratic {
    a: DenseMatrix,
    b: Vec<f64>,
    n: usize,
    analytic_m2: Option<f64>,
    psd: bool,
}

impl MatrixQuadratic {
    pub fn new(
        a: DenseMatrix,
        quadratic: Vec<f64>,
        analytic_m2: Option<f64>,
        symmetric_psd: bool,
    ) -> Result<Self> {
        let n = a.n();
        if quadratic.len() != n * n * n {
            return Err(Error::Shape(format!(
                "quadratic tensor has {} entries, expected {}",
                quadratic.len(),
                n * n * n
            )));
        }
        if symmetric_psd && !a.is_symmetric(1e-12) {
            return Err(Error::InvalidInput(
                "operator flagged symmetric PSD but the matrix is not symmetric".into(),
            ));
        }
        let mut b = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    b[(i * n + j) * n + k] =
                        0.5 * (quadratic[(i * n + j) * n + k] + quadratic[(i * n + k) * n + j]);
                }
            }
        }
        Ok(Self {
            a,
            b,
            n,
            analytic_m2,
            psd: symmetric_psd,
        })
    }

    /// Purely linear instance (zero quadratic tensor).
    pub fn linear(a: DenseMatrix) -> Result<Self> {
        let n = a.n();
        Self::new(a, vec![0.0; n * n * n], Some(0.0), false)
    }

    /// Diagonal linear instance, flagged PSD when all entries are >= 0.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut a = DenseMatrix::zeros(n);
        for (i, d) in diag.iter().enumerate() {
            a[(i, i)] = *d;
        }
        let psd = diag.iter().all(|d| *d >= 0.0);
        let mut op = Self::linear(a)?;
        op.psd = psd;
        Ok(op)
    }

    /// The standard 2D certified test family: A = diag(0, 1) and
    /// F_i += beta * u_i^2, which has analytic M2 = 2*beta and M3 = 0.
    pub fn componentwise_square_2d(beta: f64) -> Self {
        let mut a = DenseMatrix::zeros(2);
        a[(1, 1)] = 1.0;
        let mut quad = vec![0.0; 8];
        quad[0] = beta; // i=0, j=0, k=0
        quad[7] = beta; // i=1, j=1, k=1
        let mut op = Self::new(a, quad, Some(2.0 * beta), true).expect("valid 2x2 instance");
        op.psd = true;
        op
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    /// B(u, v) with the symmetrized tensor.
    fn bilinear(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                let base = (i * n + j) * n;
                let uj = u[j];
                if uj == 0.0 {
                    continue;
                }
                for k in 0..n {
                    let c = self.b[base + k];
                    if c != 0.0 {
                        acc += c * uj * v[k];
                    }
                }
            }
            out[i] = acc;
        }
        out
    }
}

impl OperatorModel for MatrixQuadratic {
    fn space(&self) -> SpaceTag {
        SpaceTag::Abstract { dim: self.n }
    }

    fn evaluate(&self, u: &HilbertVector) -> Result<HilbertVector> {
        if u.dim() != self.n {
            return Err(Error::Shape(format!(
                "operator dimension {} vs vector dimension {}",
                self.n,
                u.dim()
            )));
        }
        let mut out = self.a.matvec(u.coeffs());
        for (o, q) in out.iter_mut().zip(self.bilinear(u.coeffs(), u.coeffs())) {
            *o += q;
        }
        HilbertVector::new(self.space(), out)
    }

    fn derivative_apply(&self, u: &HilbertVector, psi: &HilbertVector) -> Result<HilbertVector> {
        if u.dim() != self.n || psi.dim() != self.n {
            return Err(Error::Shape(
                "dimension mismatch in derivative_apply".into(),
            ));
        }
        // F'(u) psi = A psi + 2 B(u, psi)
        let mut out = self.a.matvec(psi.coeffs());
        for (o, q) in out.iter_mut().zip(self.bilinear(u.coeffs(), psi.coeffs())) {
            *o += 2.0 * q;
        }
        HilbertVector::new(self.space(), out)
    }

    fn analytic_bounds(&self, _radius: f64) -> Option<(f64, f64)> {
        self.analytic_m2.map(|m2| (m2, 0.0))
    }

    fn linearization_is_psd(&self) -> bool {
        self.psd
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Norm;
    use crate::operator::taylor_remainder;

    #[test]
    fn evaluate_matches_hand_computation() {
        let op = MatrixQuadratic::componentwise_square_2d(0.5);
        let u = HilbertVector::from_abstract(vec![2.0, 3.0]).unwrap();
        let f = op.evaluate(&u).unwrap();
        // F = (0.5*4, 3 + 0.5*9)
        assert_eq!(f.coeffs(), &[2.0, 7.5]);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let op = MatrixQuadratic::componentwise_square_2d(0.5);
        let u = HilbertVector::from_abstract(vec![0.4, -0.2]).unwrap();
        let psi = HilbertVector::from_abstract(vec![-0.3, 0.9]).unwrap();
        let t = 1e-6;
        let fd = op
            .evaluate(&u.axpy(t, &psi).unwrap())
            .unwrap()
            .sub(&op.evaluate(&u.axpy(-t, &psi).unwrap()).unwrap())
            .unwrap()
            .scaled(1.0 / (2.0 * t));
        let exact = op.derivative_apply(&u, &psi).unwrap();
        let err = fd.sub(&exact).unwrap().norm(Norm::L2).unwrap();
        assert!(err < 1e-9);
    }

    #[test]
    fn remainder_respects_analytic_bound_with_equality_on_axes() {
        let op = MatrixQuadratic::componentwise_square_2d(0.5);
        let z = HilbertVector::from_abstract(vec![0.6, 0.0]).unwrap();
        let k = taylor_remainder(&op, &z).unwrap();
        let m2 = op.analytic_bounds(1.0).unwrap().0;
        let bound = m2 * 0.36 / 2.0;
        let knorm = k.norm(Norm::L2).unwrap();
        assert!((knorm - bound).abs() < 1e-14, "axis direction attains M2");
    }

    #[test]
    fn tensor_is_symmetrized() {
        // asymmetric input tensor acts like its symmetric part
        let mut quad = vec![0.0; 8];
        quad[1] = 1.0; // B[0][0][1] only
        let op = MatrixQuadratic::new(DenseMatrix::zeros(2), quad, None, false).unwrap();
        let u = HilbertVector::from_abstract(vec![2.0, 3.0]).unwrap();
        let f = op.evaluate(&u).unwrap();
        assert!((f.coeffs()[0] - 6.0).abs() < 1e-15); // u0*u1 = 6 with weight (1+1)/2 twice
    }
}
