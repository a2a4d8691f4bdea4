//! P1 Lagrange finite elements on [`TriMesh`](crate::mesh::TriMesh).

mod assembly;
mod dirichlet;
mod norms;
mod peak;
mod quadrature;
mod solver;
mod sparse;

pub use assembly::{
    assemble_advection, assemble_energy_load, assemble_lumped_mass, assemble_mass,
    assemble_stiffness, assemble_stiffness_on, element_gradients, element_mass,
    element_stiffness, lump_mass, assemble_load, interpolate,
};
pub use dirichlet::{apply_dirichlet, DirichletSystem, DofMap};
pub use norms::{error_norm, NormKind};
pub use peak::{peak_value, Peak};
pub use quadrature::QuadratureRule;
pub use solver::{solve_spd, solve_spd_from, CgOptions, CgSolution, LinearOperator};
pub use sparse::{DiagonalMatrix, SparseMatrix};
pub(crate) use assembly::corner_slot;
pub(crate) use solver::{dot, norm};

use crate::mesh::Point2;

/// A scalar function of position, optionally with its gradient.
///
/// Closures `Fn(Point2) -> f64` implement this without a gradient.
pub trait ScalarField {
    fn value(&self, x: Point2) -> f64;

    fn gradient(&self, _x: Point2) -> Option<[f64; 2]> {
        None
    }
}

impl<F: Fn(Point2) -> f64> ScalarField for F {
    fn value(&self, x: Point2) -> f64 {
        self(x)
    }
}

/// Coefficient vector with one entry per mesh vertex.
pub type FieldVector = alloc::vec::Vec<f64>;
