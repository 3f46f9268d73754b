//! Finite-dimensional Hilbert-space substrate: vectors tagged with the space
//! they live in, inner products, and discrete L2 / H1 / L4 / L6 norms.
//!
//! Grid vectors integrate with tensor-product trapezoidal weights; the H1
//! form adds the L2 form of forward-difference gradients (one-sided at the
//! upper boundary), which keeps the squared norm a sum of squares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridDomain;

/// Which space a coefficient vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceTag {
    /// Plain R^n with the Euclidean inner product as L2.
    Abstract { dim: usize },
    /// Grid function over a 3D box; quadrature-weighted norms.
    Grid(GridDomain),
}

impl SpaceTag {
    pub fn dim(&self) -> usize {
        match self {
            SpaceTag::Abstract { dim } => *dim,
            SpaceTag::Grid(g) => g.len(),
        }
    }

    pub fn grid(&self) -> Option<&GridDomain> {
        match self {
            SpaceTag::Grid(g) => Some(g),
            SpaceTag::Abstract { .. } => None,
        }
    }
}

/// Norm selector. `inner_product` accepts only the bilinear kinds (L2, H1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L2,
    H1,
    L4,
    L6,
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Norm::L2 => "l2",
            Norm::H1 => "h1",
            Norm::L4 => "l4",
            Norm::L6 => "l6",
        };
        f.write_str(s)
    }
}

/// Element of the discrete Hilbert space: coefficients plus a space tag.
/// All entries are finite by construction; vectors combine arithmetically
/// only when dimensions and tags match.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertVector {
    coeffs: Vec<f64>,
    space: SpaceTag,
}

impl HilbertVector {
    pub fn new(space: SpaceTag, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::Shape(format!(
                "coefficient count {} does not match space dimension {}",
                coeffs.len(),
                space.dim()
            )));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!(
                "coefficient {i} is {}",
                coeffs[i]
            )));
        }
        Ok(Self { coeffs, space })
    }

    pub fn from_abstract(coeffs: Vec<f64>) -> Result<Self> {
        let dim = coeffs.len();
        Self::new(SpaceTag::Abstract { dim }, coeffs)
    }

    pub fn on_grid(grid: GridDomain, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(SpaceTag::Grid(grid), coeffs)
    }

    pub fn zeros(space: SpaceTag) -> Self {
        Self {
            coeffs: vec![0.0; space.dim()],
            space,
        }
    }

    /// Sample a function of physical position onto a grid.
    pub fn sample(grid: GridDomain, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let [nx, ny, nz] = grid.points();
        let mut coeffs = Vec::with_capacity(grid.len());
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    coeffs.push(f(grid.position(ix, iy, iz)));
                }
            }
        }
        Self::on_grid(grid, coeffs)
    }

    pub fn constant(space: SpaceTag, value: f64) -> Result<Self> {
        Self::new(space, vec![value; space.dim()])
    }

    pub fn space(&self) -> &SpaceTag {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::Shape(
                "vectors live in different spaces (dimension or tag mismatch)".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            coeffs,
            space: self.space,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            coeffs,
            space: self.space,
        })
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| alpha * c).collect(),
            space: self.space,
        }
    }

    /// self + alpha * other.
    pub fn axpy(&self, alpha: f64, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Ok(Self {
            coeffs,
            space: self.space,
        })
    }

    /// Entrywise map, same space.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
            space: self.space,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Forward-difference gradient component along one axis; the last plane
    /// uses the backward difference so the result has the same shape.
    fn forward_diff(&self, grid: &GridDomain, axis: usize) -> Vec<f64> {
        let [nx, ny, nz] = grid.points();
        let n_axis = grid.points()[axis];
        let h = grid.spacing()[axis];
        let stride = match axis {
            0 => 1,
            1 => nx,
            _ => nx * ny,
        };
        let mut out = vec![0.0; self.coeffs.len()];
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    let i_axis = [ix, iy, iz][axis];
                    let idx = grid.index_of(ix, iy, iz);
                    out[idx] = if i_axis + 1 < n_axis {
                        (self.coeffs[idx + stride] - self.coeffs[idx]) / h
                    } else {
                        (self.coeffs[idx] - self.coeffs[idx - stride]) / h
                    };
                }
            }
        }
        out
    }

    /// Symmetric bilinear form. L2 is weighted (quadrature) or Euclidean
    /// (abstract); H1 adds the weighted form of the forward-difference
    /// gradients and requires a grid tag.
    pub fn inner_product(&self, other: &Self, kind: Norm) -> Result<f64> {
        self.check_compatible(other)?;
        match kind {
            Norm::L2 => Ok(self.weighted_dot(other)),
            Norm::H1 => {
                let grid = self.space.grid().ok_or_else(|| {
                    Error::Shape("H1 inner product requires a grid-tagged vector".into())
                })?;
                let w = grid.quadrature_weights();
                let mut acc = dot3(&self.coeffs, &other.coeffs, &w);
                for axis in 0..3 {
                    let du = self.forward_diff(grid, axis);
                    let dv = other.forward_diff(grid, axis);
                    acc += dot3(&du, &dv, &w);
                }
                Ok(acc)
            }
            Norm::L4 | Norm::L6 => Err(Error::InvalidInput(
                "inner_product is defined for L2 and H1 only".into(),
            )),
        }
    }

    fn weighted_dot(&self, other: &Self) -> f64 {
        match &self.space {
            SpaceTag::Abstract { .. } => self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a * b)
                .sum(),
            SpaceTag::Grid(g) => {
                let w = g.quadrature_weights();
                dot3(&self.coeffs, &other.coeffs, &w)
            }
        }
    }

    /// Norm of the selected kind. Nonnegative, zero iff the vector is zero,
    /// homogeneous of degree one.
    pub fn norm(&self, kind: Norm) -> Result<f64> {
        match kind {
            Norm::L2 | Norm::H1 => Ok(self.inner_product(self, kind)?.max(0.0).sqrt()),
            Norm::L4 => self.p_norm(4),
            Norm::L6 => self.p_norm(6),
        }
    }

    fn p_norm(&self, p: u32) -> Result<f64> {
        let sum = match &self.space {
            SpaceTag::Abstract { .. } => self.coeffs.iter().map(|c| c.abs().powi(p as i32)).sum(),
            SpaceTag::Grid(g) => {
                let w = g.quadrature_weights();
                self.coeffs
                    .iter()
                    .zip(&w)
                    .map(|(c, w)| w * c.abs().powi(p as i32))
                    .fold(0.0, |a, b| a + b)
            }
        };
        Ok(f64::powf(sum, 1.0 / p as f64))
    }
}

#[inline]
fn dot3(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((a, b), w)| w * a * b).sum()
}
