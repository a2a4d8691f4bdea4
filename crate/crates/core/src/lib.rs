//! Energy-corrected P1 finite elements for parabolic problems on polygonal
//! domains with re-entrant corners.
//!
//! The crate is `no_std` and only needs `alloc`. It provides:
//!
//! - [`mesh`]: structured triangulations of the L-shape and the notched
//!   rectangle, uniform and graded refinement, corner layers.
//! - [`fem`]: P1 assembly (stiffness, mass, advection, loads), Dirichlet
//!   elimination, a Jacobi-preconditioned CG solver and error norms.
//! - [`singular`]: corner singular functions, their duals, the smooth cutoff
//!   and the manufactured solutions used by the convergence studies.
//! - [`correction`]: the local stiffness correction, the modified Ritz
//!   projection, the correction-parameter search, stress-intensity-factor
//!   extraction and post-processing.
//! - [`parabolic`]: explicit Euler, Heun and Crank-Nicolson time stepping,
//!   CFL estimation and observers.
#![no_std]
// `num_traits::Float` supplies the float methods without std; when a
// dev-dependency links std they become inherent and the import looks unused.
#![allow(unused_imports)]
// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod correction;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod parabolic;
pub mod singular;

mod gauss;

pub use error::{Error, Result};
pub use mesh::{BoundaryTag, MeshCorner, Point2, ReentrantCorner, TriMesh};
