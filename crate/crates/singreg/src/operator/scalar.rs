//! One-dimensional cubic F(u) = u^3, the scalar analogue of the Newtonian
//! instance: its derivative vanishes at the root y = 0.

use crate::error::{Error, Result};
use crate::hilbert::{HilbertVector, SpaceTag};

use super::OperatorModel;

/// F(u) = u^3 on R. Analytic bounds on [-R, R]: M2 = 6R, M3 = 6.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScalarCubic;

impl ScalarCubic {
    pub fn new() -> Self {
        Self
    }
}

impl OperatorModel for ScalarCubic {
    fn space(&self) -> SpaceTag {
        SpaceTag::Abstract { dim: 1 }
    }

    fn evaluate(&self, u: &HilbertVector) -> Result<HilbertVector> {
        if u.dim() != 1 {
            return Err(Error::Shape("scalar operator needs dimension 1".into()));
        }
        let x = u.coeffs()[0];
        HilbertVector::new(self.space(), vec![x * x * x])
    }

    fn derivative_apply(&self, u: &HilbertVector, psi: &HilbertVector) -> Result<HilbertVector> {
        if u.dim() != 1 || psi.dim() != 1 {
            return Err(Error::Shape("scalar operator needs dimension 1".into()));
        }
        let x = u.coeffs()[0];
        HilbertVector::new(self.space(), vec![3.0 * x * x * psi.coeffs()[0]])
    }

    fn analytic_bounds(&self, radius: f64) -> Option<(f64, f64)> {
        Some((6.0 * radius, 6.0))
    }

    fn linearization_is_psd(&self) -> bool {
        // F'(0) = 0 is (trivially) symmetric PSD
        true
    }
}
