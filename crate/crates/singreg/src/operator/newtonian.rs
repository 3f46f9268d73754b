//! Cubic Hammerstein integral operator with the Newtonian-potential kernel,
//! discretized on a uniform 3D grid: F(u) = G u^3 where
//! (G v)(x_i) = sum_j w_j * v(s_j) / (4 pi |x_i - s_j|).
//!
//! The kernel matrix is precomputed dense at construction; matvec reuse
//! dominates the cost at desk scale. The singular self-cell entry is the
//! exact integral of 1/(4 pi r) over a sphere whose volume equals one grid
//! cell, a^2/2 with a = (3 h1 h2 h3 / (4 pi))^(1/3), which preserves the
//! cell's mean kernel value and keeps the matrix entrywise positive.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridDomain;
use crate::hilbert::{HilbertVector, Norm, SpaceTag};

use super::OperatorModel;

/// Dense discretization of F(u) = integral of u^3 against the 1/(4 pi |x-s|)
/// kernel. Base point y = 0: the cubic nonlinearity kills both F and F' there.
pub struct NewtonianCubicOperator {
    domain: GridDomain,
    kernel: Vec<f64>,
    n: usize,
    /// Optional constant source shift: evaluate returns G u^3 - f.
    source: Option<HilbertVector>,
}

impl NewtonianCubicOperator {
    /// Desk-scale envelope for the dense kernel matrix.
    pub const MAX_KERNEL_POINTS: usize = 32 * 32 * 32;

    pub fn new(domain: GridDomain) -> Result<Self> {
        let n = domain.len();
        if n > Self::MAX_KERNEL_POINTS {
            return Err(Error::InvalidInput(format!(
                "grid has {n} nodes; the dense-kernel envelope is {}",
                Self::MAX_KERNEL_POINTS
            )));
        }
        let weights = domain.quadrature_weights();
        let positions: Vec<[f64; 3]> = (0..n)
            .map(|idx| {
                let (ix, iy, iz) = domain.coords_of(idx);
                domain.position(ix, iy, iz)
            })
            .collect();
        let diag = Self::self_cell_entry(&domain);
        let mut kernel = vec![0.0; n * n];
        kernel.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let xi = positions[i];
            for (j, out) in row.iter_mut().enumerate() {
                if i == j {
                    *out = diag;
                } else {
                    let sj = positions[j];
                    let dx = xi[0] - sj[0];
                    let dy = xi[1] - sj[1];
                    let dz = xi[2] - sj[2];
                    let r = (dx * dx + dy * dy + dz * dz).sqrt();
                    *out = weights[j] / (4.0 * std::f64::consts::PI * r);
                }
            }
        });
        Ok(Self {
            domain,
            kernel,
            n,
            source: None,
        })
    }

    /// Exact integral of 1/(4 pi r) over the volume-equivalent sphere of one
    /// grid cell.
    pub fn self_cell_entry(domain: &GridDomain) -> f64 {
        let cell = domain.cell_volume();
        let a = (3.0 * cell / (4.0 * std::f64::consts::PI)).powf(1.0 / 3.0);
        0.5 * a * a
    }

    /// Attach a constant source term; evaluate then returns G u^3 - f.
    /// Certified solves require the default f = 0 (base point y = 0).
    pub fn with_source(mut self, f: HilbertVector) -> Result<Self> {
        if f.space() != &SpaceTag::Grid(self.domain) {
            return Err(Error::Shape(
                "source term must live on the operator grid".into(),
            ));
        }
        self.source = Some(f);
        Ok(self)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn kernel_entry(&self, i: usize, j: usize) -> f64 {
        self.kernel[i * self.n + j]
    }

    /// Kernel matvec, row-parallel. Each output entry is a sequential dot
    /// product, so results do not depend on the thread count.
    pub fn kernel_apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let row = &self.kernel[i * n..(i + 1) * n];
                row.iter().zip(v).map(|(k, x)| k * x).sum()
            })
            .collect()
    }

    fn check_space(&self, u: &HilbertVector) -> Result<()> {
        if u.space() != &SpaceTag::Grid(self.domain) {
            return Err(Error::Shape(
                "vector does not live on the operator's grid".into(),
            ));
        }
        Ok(())
    }
}

impl OperatorModel for NewtonianCubicOperator {
    fn space(&self) -> SpaceTag {
        SpaceTag::Grid(self.domain)
    }

    fn natural_norm(&self) -> Norm {
        Norm::H1
    }

    fn evaluate(&self, u: &HilbertVector) -> Result<HilbertVector> {
        self.check_space(u)?;
        let cubed: Vec<f64> = u.coeffs().iter().map(|x| x * x * x).collect();
        let mut out = self.kernel_apply(&cubed);
        if let Some(f) = &self.source {
            for (o, fv) in out.iter_mut().zip(f.coeffs()) {
                *o -= fv;
            }
        }
        HilbertVector::new(self.space(), out)
    }

    fn derivative_apply(&self, u: &HilbertVector, psi: &HilbertVector) -> Result<HilbertVector> {
        self.check_space(u)?;
        self.check_space(psi)?;
        let weighted: Vec<f64> = u
            .coeffs()
            .iter()
            .zip(psi.coeffs())
            .map(|(x, p)| 3.0 * x * x * p)
            .collect();
        HilbertVector::new(self.space(), self.kernel_apply(&weighted))
    }

    fn linearization_is_psd(&self) -> bool {
        // F'(0) = 0
        true
    }
}
