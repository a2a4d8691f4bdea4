//! Elimination of Dirichlet vertices with a boundary lift.

use alloc::vec;
use alloc::vec::Vec;

use super::{ScalarField, SparseMatrix};
use crate::error::{Error, Result};
use crate::mesh::TriMesh;

/// Split of the vertices into free and Dirichlet-constrained ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    free: Vec<usize>,
    constrained: Vec<usize>,
    to_free: Vec<Option<usize>>,
}

impl DofMap {
    pub fn from_mesh(mesh: &TriMesh) -> Self {
        let mut free = Vec::new();
        let mut constrained = Vec::new();
        let mut to_free = vec![None; mesh.n_vertices()];
        for (v, tag) in mesh.boundary().iter().enumerate() {
            if tag.is_dirichlet() {
                constrained.push(v);
            } else {
                to_free[v] = Some(free.len());
                free.push(v);
            }
        }
        DofMap {
            free,
            constrained,
            to_free,
        }
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn constrained(&self) -> &[usize] {
        &self.constrained
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn n_total(&self) -> usize {
        self.to_free.len()
    }

    /// Position of vertex `v` among the free dofs.
    pub fn free_index(&self, v: usize) -> Option<usize> {
        self.to_free[v]
    }

    /// Free entries of a full vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&v| full[v]).collect()
    }

    /// Full vector from free values and the boundary values held in `lift`.
    pub fn expand(&self, free: &[f64], lift: &[f64]) -> Vec<f64> {
        let mut full = lift.to_vec();
        for (&v, &x) in self.free.iter().zip(free) {
            full[v] = x;
        }
        full
    }

    /// Vector that interpolates `g` on constrained vertices and is 0 elsewhere.
    pub fn lift(&self, mesh: &TriMesh, g: &impl ScalarField) -> Vec<f64> {
        let mut lift = vec![0.0; self.n_total()];
        for &v in &self.constrained {
            lift[v] = g.value(mesh.vertices()[v]);
        }
        lift
    }
}

/// Linear system on the free dofs after eliminating Dirichlet values.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
    pub lift: Vec<f64>,
}

impl DirichletSystem {
    /// Full solution vector from a solution of the reduced system.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        self.dofs.expand(free, &self.lift)
    }
}

/// Reduces `A u = rhs` to the free dofs with `u = g` on Dirichlet vertices.
///
/// The reduced right-hand side is `rhs_f - A_fc g_c`.
pub fn apply_dirichlet(
    a: &SparseMatrix,
    rhs: &[f64],
    g: &impl ScalarField,
    mesh: &TriMesh,
) -> Result<DirichletSystem> {
    let n = mesh.n_vertices();
    for found in [a.n_rows(), a.n_cols(), rhs.len()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    let dofs = DofMap::from_mesh(mesh);
    let lift = dofs.lift(mesh, g);
    let a_lift = a.mul_vec(&lift);
    let rhs = dofs.free().iter().map(|&v| rhs[v] - a_lift[v]).collect();
    let matrix = a.submatrix(dofs.free(), dofs.free());
    Ok(DirichletSystem {
        matrix,
        rhs,
        dofs,
        lift,
    })
}
