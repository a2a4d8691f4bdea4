//! Jacobi-preconditioned conjugate gradients.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use super::{DiagonalMatrix, SparseMatrix};
use crate::error::{Error, Result};

/// A square operator that can be applied to a vector.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Diagonal used for Jacobi preconditioning.
    fn diagonal(&self) -> Vec<f64>;
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.n_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y)
    }

    fn diagonal(&self) -> Vec<f64> {
        SparseMatrix::diagonal(self)
    }
}

impl LinearOperator for DiagonalMatrix {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, d), xi) in y.iter_mut().zip(self.values()).zip(x) {
            *yi = d * xi;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.values().to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Relative residual `|b - A x| / |b|` to reach.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

impl CgOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
}

/// Solves `A x = b` for symmetric positive definite `A`, starting from zero.
pub fn solve_spd(a: &impl LinearOperator, b: &[f64], opts: &CgOptions) -> Result<CgSolution> {
    solve_spd_from(a, b, &vec![0.0; b.len()], opts)
}

/// As [`solve_spd`] with an initial guess.
pub fn solve_spd_from(
    a: &impl LinearOperator,
    b: &[f64],
    x0: &[f64],
    opts: &CgOptions,
) -> Result<CgSolution> {
    let n = a.dim();
    for found in [b.len(), x0.len()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(CgSolution {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = x0.to_vec();
    let mut ap = vec![0.0; n];
    a.apply(&x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut residual = norm(&r) / b_norm;
    let mut iterations = 0;
    while residual > opts.tol {
        if iterations == opts.max_iter {
            return Err(Error::CgNotConverged {
                iterations,
                residual,
            });
        }
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            // breakdown: operator not positive definite on the Krylov space
            return Err(Error::CgNotConverged {
                iterations,
                residual,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        iterations += 1;
        residual = norm(&r) / b_norm;
    }
    Ok(CgSolution {
        x,
        iterations,
        residual,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{apply_dirichlet, assemble_load, assemble_stiffness, QuadratureRule};
    use crate::mesh::{build_l_shape, Point2};
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn identity_converges_in_one_step() {
        let sol = solve_spd(&SparseMatrix::identity(4), &[1.0, 0.0, 0.0, 0.0], &CgOptions::default()).unwrap();
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.x, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn two_by_two() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)]).unwrap();
        let sol = solve_spd(&a, &[1.0, 0.0], &CgOptions::default()).unwrap();
        assert!((sol.x[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((sol.x[1] + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn iteration_limit_reports_residual() {
        let a = SparseMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0), (0, 2, 0.5), (2, 0, 0.5)]).unwrap();
        let err = solve_spd(&a, &[1.0, 1.0, 1.0], &CgOptions { tol: 1e-14, max_iter: 1 });
        assert!(matches!(err, Err(Error::CgNotConverged { iterations: 1, .. })));
    }

    #[test]
    fn poisson_matches_dense_solve() {
        let mesh = build_l_shape();
        let s = assemble_stiffness(&mesh).unwrap();
        let f = assemble_load(&mesh, &|_: Point2| 1.0, &QuadratureRule::default()).unwrap();
        let sys = apply_dirichlet(&s, &f, &|_: Point2| 0.0, &mesh).unwrap();
        let sol = solve_spd(&sys.matrix, &sys.rhs, &CgOptions::default().with_tol(1e-14)).unwrap();
        let n = sys.matrix.n_rows();
        let dense = DMatrix::from_fn(n, n, |i, j| sys.matrix.get(i, j));
        let exact = dense.lu().solve(&DVector::from_vec(sys.rhs.clone())).unwrap();
        for (a, b) in sol.x.iter().zip(exact.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
