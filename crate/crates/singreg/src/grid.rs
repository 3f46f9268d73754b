//! Axis-aligned 3D box with a uniform tensor grid.
//!
//! The grid hosts trapezoidal quadrature weights and the forward-difference
//! gradients used by the discrete Sobolev norms. Linear indexing is
//! x-fastest: `idx = (iz * ny + iy) * nx + ix`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid over an axis-aligned box in R^3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    lower: [f64; 3],
    edges: [f64; 3],
    points: [usize; 3],
    spacing: [f64; 3],
}

impl GridDomain {
    /// Hard cap on grid size; matches the refined-quadrature envelope.
    /// The dense-kernel operator enforces its own tighter limit.
    pub const MAX_POINTS: usize = 64 * 64 * 64;

    pub fn new(lower: [f64; 3], edges: [f64; 3], points: [usize; 3]) -> Result<Self> {
        for d in 0..3 {
            if !lower[d].is_finite() || !edges[d].is_finite() {
                return Err(Error::NonFinite("grid corner or edge".into()));
            }
            if edges[d] <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "edge length along axis {d} must be positive, got {}",
                    edges[d]
                )));
            }
            if points[d] < 2 {
                return Err(Error::InvalidInput(format!(
                    "need at least 2 points per axis, got {} on axis {d}",
                    points[d]
                )));
            }
        }
        let total = points[0] * points[1] * points[2];
        if total > Self::MAX_POINTS {
            return Err(Error::InvalidInput(format!(
                "grid has {total} points; the dense-kernel envelope is {}",
                Self::MAX_POINTS
            )));
        }
        let spacing = [
            edges[0] / (points[0] - 1) as f64,
            edges[1] / (points[1] - 1) as f64,
            edges[2] / (points[2] - 1) as f64,
        ];
        Ok(Self {
            lower,
            edges,
            points,
            spacing,
        })
    }

    /// Unit cube helper used throughout tests and examples.
    pub fn unit_cube(points_per_axis: usize) -> Result<Self> {
        Self::new(
            [0.0; 3],
            [1.0; 3],
            [points_per_axis, points_per_axis, points_per_axis],
        )
    }

    pub fn lower(&self) -> [f64; 3] {
        self.lower
    }

    pub fn edges(&self) -> [f64; 3] {
        self.edges
    }

    pub fn points(&self) -> [usize; 3] {
        self.points
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    /// Total number of grid nodes.
    pub fn len(&self) -> usize {
        self.points[0] * self.points[1] * self.points[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one interior cell, h1*h2*h3.
    pub fn cell_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    #[inline]
    pub fn index_of(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (iz * self.points[1] + iy) * self.points[0] + ix
    }

    #[inline]
    pub fn coords_of(&self, idx: usize) -> (usize, usize, usize) {
        let nx = self.points[0];
        let ny = self.points[1];
        let ix = idx % nx;
        let iy = (idx / nx) % ny;
        let iz = idx / (nx * ny);
        (ix, iy, iz)
    }

    /// Physical position of node (ix, iy, iz).
    #[inline]
    pub fn position(&self, ix: usize, iy: usize, iz: usize) -> [f64; 3] {
        [
            self.lower[0] + ix as f64 * self.spacing[0],
            self.lower[1] + iy as f64 * self.spacing[1],
            self.lower[2] + iz as f64 * self.spacing[2],
        ]
    }

    /// 1D trapezoidal weights along one axis: h/2 at the endpoints, h inside.
    pub fn axis_weights(&self, axis: usize) -> Vec<f64> {
        let n = self.points[axis];
        let h = self.spacing[axis];
        let mut w = vec![h; n];
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
        w
    }

    /// Tensor-product trapezoidal weight of every node, in linear index order.
    /// The weights are positive and sum to the box volume.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let wx = self.axis_weights(0);
        let wy = self.axis_weights(1);
        let wz = self.axis_weights(2);
        let mut w = Vec::with_capacity(self.len());
        for z in &wz {
            for y in &wy {
                for x in &wx {
                    w.push(x * y * z);
                }
            }
        }
        w
    }

    /// Same box, (points-1)*factor + 1 nodes per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor < 1 {
            return Err(Error::InvalidInput("refinement factor must be >= 1".into()));
        }
        let points = [
            (self.points[0] - 1) * factor + 1,
            (self.points[1] - 1) * factor + 1,
            (self.points[2] - 1) * factor + 1,
        ];
        Self::new(self.lower, self.edges, points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_count() {
        let g = GridDomain::new([0.0, 0.0, 0.0], [1.0, 2.0, 3.0], [2, 3, 4]).unwrap();
        assert_eq!(g.len(), 24);
        assert_eq!(g.spacing(), [1.0, 1.0, 1.0]);
    }

    #[test]
    fn weights_sum_to_volume() {
        let g = GridDomain::new([(-1.0), 0.5, 2.0], [2.0, 1.5, 0.5], [5, 4, 7]).unwrap();
        let total: f64 = g.quadrature_weights().iter().sum();
        let volume = 2.0 * 1.5 * 0.5;
        assert!((total - volume).abs() < 1e-12 * volume);
    }

    #[test]
    fn rejects_degenerate_axes() {
        assert!(GridDomain::new([0.0; 3], [1.0, 0.0, 1.0], [4, 4, 4]).is_err());
        assert!(GridDomain::new([0.0; 3], [1.0; 3], [1, 4, 4]).is_err());
        assert!(GridDomain::new([0.0; 3], [1.0; 3], [65, 65, 65]).is_err());
        assert!(GridDomain::new([0.0; 3], [1.0; 3], [64, 64, 64]).is_ok());
    }

    #[test]
    fn index_round_trip() {
        let g = GridDomain::new([0.0; 3], [1.0; 3], [3, 4, 5]).unwrap();
        for idx in 0..g.len() {
            let (ix, iy, iz) = g.coords_of(idx);
            assert_eq!(g.index_of(ix, iy, iz), idx);
        }
    }

    #[test]
    fn refinement_keeps_box() {
        let g = GridDomain::unit_cube(9).unwrap();
        let r = g.refined(4).unwrap();
        assert_eq!(r.points(), [33, 33, 33]);
        assert_eq!(r.lower(), g.lower());
        assert_eq!(r.edges(), g.edges());
    }
}
