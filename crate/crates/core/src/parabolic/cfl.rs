//! Explicit-Euler stability limit.

use alloc::vec::Vec;
use num_traits::Float;

use super::ParabolicProblem;
use crate::correction::modified_stiffness;
use crate::error::{Error, Result};
use crate::fem::{assemble_lumped_mass, dot, norm, DiagonalMatrix, DofMap, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIterationOptions {
    /// Relative change of the eigenvalue estimate to stop at.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerIterationOptions {
    fn default() -> Self {
        PowerIterationOptions {
            tol: 1e-4,
            max_iter: 500,
        }
    }
}

/// `2 / lambda_max(M^-1 S)` for a diagonal `M` and symmetric `S`.
///
/// The eigenvalue is estimated by power iteration on `M^-1/2 S M^-1/2`,
/// started from an oscillating vector. An empty system has no limit and
/// gives `f64::INFINITY`.
pub fn cfl_max_dt(m: &DiagonalMatrix, s: &SparseMatrix, opts: &PowerIterationOptions) -> Result<f64> {
    let n = m.len();
    for found in [s.n_rows(), s.n_cols()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    if n == 0 {
        return Ok(f64::INFINITY);
    }
    let scale: Vec<f64> = m.values().iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * (1.0 + 0.25 * (i as f64).sin())
        })
        .collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut tmp = alloc::vec![0.0; n];
    let mut y = alloc::vec![0.0; n];
    let mut lambda = 0.0;
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_iter {
        for i in 0..n {
            tmp[i] = scale[i] * x[i];
        }
        s.mul_vec_into(&tmp, &mut y);
        for i in 0..n {
            y[i] *= scale[i];
        }
        let next = dot(&x, &y);
        let ny = norm(&y);
        if !(next > 0.0) || !ny.is_finite() {
            return Err(Error::InvalidParameter(
                "stiffness is not positive definite on the free vertices".into(),
            ));
        }
        change = (next - lambda).abs() / next;
        lambda = next;
        for i in 0..n {
            x[i] = y[i] / ny;
        }
        if change <= opts.tol {
            return Ok(2.0 / lambda);
        }
    }
    Err(Error::PowerIterationStagnated {
        iterations: opts.max_iter,
        relative_change: change,
    })
}

/// Stability limit of explicit Euler with lumped mass for `problem`, using
/// the (corrected) stiffness on the free vertices. Advection is ignored.
pub fn explicit_dt_limit(problem: &ParabolicProblem<'_>, opts: &PowerIterationOptions) -> Result<f64> {
    let mesh = problem.mesh;
    let dofs = DofMap::from_mesh(mesh);
    let s = modified_stiffness(mesh, &problem.correction)?.submatrix(dofs.free(), dofs.free());
    let m = assemble_lumped_mass(mesh)?.restrict(dofs.free());
    cfl_max_dt(&m, &s, opts)
}
