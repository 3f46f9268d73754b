//! Small dense linear algebra used by the solver paths: row-major matrices,
//! LU factorization with partial pivoting (plus transposed solves for the
//! resolvent-norm power iteration), and a conjugate-gradient loop for the
//! symmetric positive-definite shifted systems.
//!
//! The reference oracles deliberately do not use this module.

use crate::error::{Error, Result};

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::Shape(format!(
                    "matrix row has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Adds eps to the diagonal, returning A + eps*I.
    pub fn shifted(&self, eps: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out[(i, i)] += eps;
        }
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let a = self[(i, j)];
                let b = self[(j, i)];
                if (a - b).abs() > tol * (1.0 + a.abs().max(b.abs())) {
                    return false;
                }
            }
        }
        true
    }

    /// LU factorization with partial pivoting, P*A = L*U.
    pub fn lu(&self) -> Result<LuFactors> {
        let n = self.n;
        let mut lu = self.data.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut max = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let v = lu[i * n + k].abs();
                if v > max {
                    max = v;
                    p = i;
                }
            }
            if max == 0.0 {
                return Err(Error::LinearSolve {
                    achieved: f64::INFINITY,
                    tolerance: 0.0,
                    iterations: k,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                for j in (k + 1)..n {
                    lu[i * n + j] -= factor * lu[k * n + j];
                }
            }
        }
        Ok(LuFactors { n, lu, piv })
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Packed LU factors with the pivot permutation, P*A = L*U.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl LuFactors {
    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        // x = U^{-1} L^{-1} P b
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    /// Solve A^T y = b using the same factors: A^T = U^T L^T P.
    pub fn solve_transposed(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        // forward substitution with U^T (lower triangular)
        let mut w = vec![0.0; n];
        for i in 0..n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.lu[j * n + i] * w[j];
            }
            w[i] = acc / self.lu[i * n + i];
        }
        // backward substitution with L^T (unit upper triangular)
        for i in (0..n).rev() {
            let mut acc = w[i];
            for j in (i + 1)..n {
                acc -= self.lu[j * n + i] * w[j];
            }
            w[i] = acc;
        }
        // y = P^T w
        let mut y = vec![0.0; n];
        for (k, &p) in self.piv.iter().enumerate() {
            y[p] = w[k];
        }
        y
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugate gradients on a symmetric positive-definite operator given as a
/// closure. Stops when the recomputed residual satisfies
/// ||A x - b|| <= tol * ||b||.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<Vec<f64>> {
    let n = b.len();
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for k in 0..max_iterations {
        if rr.sqrt() <= tol * b_norm {
            // confirm with a recomputed residual before declaring victory
            let ax = apply(&x);
            let true_res: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let achieved = norm2(&true_res);
            if achieved <= tol * b_norm {
                return Ok(x);
            }
            r = true_res;
            rr = dot(&r, &r);
            p = r.clone();
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::LinearSolve {
                achieved: rr.sqrt(),
                tolerance: tol * b_norm,
                iterations: k,
            });
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_next;
    }
    let ax = apply(&x);
    let achieved = norm2(&b.iter().zip(&ax).map(|(b, a)| b - a).collect::<Vec<f64>>());
    if achieved <= tol * b_norm {
        Ok(x)
    } else {
        Err(Error::LinearSolve {
            achieved,
            tolerance: tol * b_norm,
            iterations: max_iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_matrix(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = rng.gen_range(-1.0..1.0);
            }
        }
        m
    }

    #[test]
    fn lu_solves_random_systems() {
        for seed in 0..5u64 {
            let n = 8;
            let a = random_matrix(n, seed).shifted(3.0); // keep it well conditioned
            let lu = a.lu().unwrap();
            let x_true: Vec<f64> = (0..n).map(|i| (i as f64) - 2.5).collect();
            let b = a.matvec(&x_true);
            let x = lu.solve(&b);
            for (xi, ti) in x.iter().zip(&x_true) {
                assert!((xi - ti).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn transposed_solve_matches_explicit_transpose() {
        let n = 7;
        let a = random_matrix(n, 11).shifted(2.0);
        let mut at = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                at[(i, j)] = a[(j, i)];
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let via_factors = a.lu().unwrap().solve_transposed(&b);
        let direct = at.lu().unwrap().solve(&b);
        for (x, y) in via_factors.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = DenseMatrix::zeros(3);
        assert!(a.lu().is_err());
    }

    #[test]
    fn cg_matches_lu_on_spd_system() {
        let n = 10;
        let b_mat = random_matrix(n, 3);
        // A = B^T B + 0.1 I is symmetric positive definite
        let mut a = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += b_mat[(k, i)] * b_mat[(k, j)];
                }
                a[(i, j)] = acc;
            }
        }
        let a = a.shifted(0.1);
        let b: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let x_cg = conjugate_gradient(|v| a.matvec(v), &b, 1e-13, 40 * n).unwrap();
        let x_lu = a.lu().unwrap().solve(&b);
        for (x, y) in x_cg.iter().zip(&x_lu) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
