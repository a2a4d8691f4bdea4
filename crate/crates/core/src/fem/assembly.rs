//! Element matrices and global assembly for P1 elements.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use super::{DiagonalMatrix, QuadratureRule, ScalarField, SparseMatrix};
use crate::error::{Error, Result};
use crate::gauss::GaussLegendre;
use crate::mesh::{Point2, TriMesh};

/// Area and gradients of the three barycentric coordinates.
///
/// Returns `None` for a triangle with non-positive area.
pub fn element_gradients(pts: [Point2; 3]) -> Option<(f64, [[f64; 2]; 3])> {
    let area = 0.5 * (pts[1] - pts[0]).cross(pts[2] - pts[0]);
    if !(area > 0.0) {
        return None;
    }
    let mut grads = [[0.0; 2]; 3];
    for (k, g) in grads.iter_mut().enumerate() {
        let (b, c) = (pts[(k + 1) % 3], pts[(k + 2) % 3]);
        *g = [(b.y - c.y) / (2.0 * area), (c.x - b.x) / (2.0 * area)];
    }
    Some((area, grads))
}

pub fn element_stiffness(pts: [Point2; 3]) -> Option<[[f64; 3]; 3]> {
    let (area, g) = element_gradients(pts)?;
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    Some(k)
}

pub fn element_mass(area: f64) -> [[f64; 3]; 3] {
    let (d, o) = (area / 6.0, area / 12.0);
    [[d, o, o], [o, d, o], [o, o, d]]
}

fn gradients(mesh: &TriMesh, t: usize) -> Result<(f64, [[f64; 2]; 3])> {
    element_gradients(mesh.triangle_points(t)).ok_or(Error::DegenerateTriangle { triangle: t })
}

fn assemble<F>(mesh: &TriMesh, triangles: impl Iterator<Item = usize>, mut local: F) -> Result<SparseMatrix>
where
    F: FnMut(usize) -> Result<[[f64; 3]; 3]>,
{
    let mut triplets = Vec::with_capacity(9 * mesh.n_triangles());
    for t in triangles {
        let m = local(t)?;
        let tri = mesh.triangles()[t];
        for i in 0..3 {
            for j in 0..3 {
                triplets.push((tri[i], tri[j], m[i][j]));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.n_vertices(), mesh.n_vertices(), &triplets)
}

/// Stiffness matrix `S_ij = (grad phi_j, grad phi_i)` over all vertices.
pub fn assemble_stiffness(mesh: &TriMesh) -> Result<SparseMatrix> {
    assemble_stiffness_on(mesh, 0..mesh.n_triangles())
}

/// Stiffness matrix restricted to the given triangles.
pub fn assemble_stiffness_on(
    mesh: &TriMesh,
    triangles: impl IntoIterator<Item = usize>,
) -> Result<SparseMatrix> {
    assemble(mesh, triangles.into_iter(), |t| {
        element_stiffness(mesh.triangle_points(t)).ok_or(Error::DegenerateTriangle { triangle: t })
    })
}

/// Consistent mass matrix `M_ij = (phi_j, phi_i)`.
pub fn assemble_mass(mesh: &TriMesh) -> Result<SparseMatrix> {
    assemble(mesh, 0..mesh.n_triangles(), |t| Ok(element_mass(gradients(mesh, t)?.0)))
}

/// Advection matrix `B_ij = (b . grad phi_j, phi_i)` for a constant field `b`.
pub fn assemble_advection(mesh: &TriMesh, b: [f64; 2]) -> Result<SparseMatrix> {
    assemble(mesh, 0..mesh.n_triangles(), |t| {
        let (area, g) = gradients(mesh, t)?;
        let mut m = [[0.0; 3]; 3];
        for row in m.iter_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = area / 3.0 * (b[0] * g[j][0] + b[1] * g[j][1]);
            }
        }
        Ok(m)
    })
}

/// Row-sum lumping of a mass matrix.
pub fn lump_mass(m: &SparseMatrix) -> Result<DiagonalMatrix> {
    DiagonalMatrix::new(m.row_sums())
}

/// Lumped mass from the vertex quadrature rule, assembled element by element.
pub fn assemble_lumped_mass(mesh: &TriMesh) -> Result<DiagonalMatrix> {
    let mut diag = vec![0.0; mesh.n_vertices()];
    for t in 0..mesh.n_triangles() {
        let area = gradients(mesh, t)?.0;
        for &v in &mesh.triangles()[t] {
            diag[v] += area / 3.0;
        }
    }
    DiagonalMatrix::new(diag)
}

/// Local index of a corner vertex in triangle `t`, if any.
pub(crate) fn corner_slot(mesh: &TriMesh, t: usize) -> Option<usize> {
    mesh.triangles()[t]
        .iter()
        .position(|&v| mesh.corner_at_vertex(v).is_some())
}

/// Load vector `F_i = (f, phi_i)` by element quadrature.
pub fn assemble_load(mesh: &TriMesh, f: &impl ScalarField, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let mut load = vec![0.0; mesh.n_vertices()];
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangles()[t];
        let mut local = [0.0; 3];
        let mut bad = None;
        rule.for_each_point(mesh.triangle_points(t), corner_slot(mesh, t), |x, bary, w| {
            let v = f.value(x);
            if !v.is_finite() {
                bad.get_or_insert(x);
            }
            for k in 0..3 {
                local[k] += w * v * bary[k];
            }
        });
        if let Some(x) = bad {
            return Err(Error::NonFiniteValue { x: x.x, y: x.y });
        }
        for k in 0..3 {
            load[tri[k]] += local[k];
        }
    }
    Ok(load)
}

/// `r_i = (grad u, grad phi_i)` for a continuous `u`, using only values of `u`.
///
/// On each triangle `int_T grad u = sum_e n_e int_e u`, so only edge
/// integrals are needed. Edges ending in a corner vertex are integrated on
/// geometrically shrinking panels towards the corner, which handles the
/// `r^lambda` behaviour of singular functions; all other edges use a
/// 16-point Gauss rule.
pub fn assemble_energy_load(mesh: &TriMesh, u: &impl ScalarField) -> Result<Vec<f64>> {
    let gauss = GaussLegendre::new(16);
    let mut edge_mean: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(a, b) in mesh.edges().keys() {
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let at = |s: f64| u.value(pa + (pb - pa) * s);
        let mean = if mesh.corner_at_vertex(a).is_some() {
            graded_mean(&gauss, at)
        } else if mesh.corner_at_vertex(b).is_some() {
            graded_mean(&gauss, |s| at(1.0 - s))
        } else {
            gauss.integrate(0.0, 1.0, at)
        };
        if !mean.is_finite() {
            let m = pa.midpoint(pb);
            return Err(Error::NonFiniteValue { x: m.x, y: m.y });
        }
        edge_mean.insert((a, b), mean);
    }
    let mut load = vec![0.0; mesh.n_vertices()];
    for t in 0..mesh.n_triangles() {
        let (_, g) = gradients(mesh, t)?;
        let tri = mesh.triangles()[t];
        let mut integral = [0.0; 2];
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let d = mesh.vertices()[b] - mesh.vertices()[a];
            let mean = edge_mean[&(a.min(b), a.max(b))];
            integral[0] += d.y * mean;
            integral[1] -= d.x * mean;
        }
        for k in 0..3 {
            load[tri[k]] += g[k][0] * integral[0] + g[k][1] * integral[1];
        }
    }
    Ok(load)
}

/// Mean of `f` over `[0, 1]` with panels `[2^-(k+1), 2^-k]` towards 0.
fn graded_mean(gauss: &GaussLegendre, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut total = 0.0;
    let mut hi: f64 = 1.0;
    for _ in 0..40 {
        let lo = 0.5 * hi;
        total += gauss.integrate(lo, hi, &mut f);
        hi = lo;
    }
    total + gauss.integrate(0.0, hi, &mut f)
}

/// Nodal interpolant.
pub fn interpolate(mesh: &TriMesh, u: &impl ScalarField) -> Vec<f64> {
    mesh.vertices().iter().map(|&x| u.value(x)).collect()
}
