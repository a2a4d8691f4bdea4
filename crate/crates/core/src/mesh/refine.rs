//! Uniform red refinement and radial grading towards a corner.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;

use super::{BoundaryTag, Point2, TriMesh};
use crate::error::{Error, Result};

/// Radius of the disc around the corner in which graded meshes are remapped.
pub const GRADING_RADIUS: f64 = 0.5;

struct Split {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryTag>,
}

/// Splits every triangle into four through its edge midpoints.
///
/// Midpoints are appended after the existing vertices in ascending order
/// of the sorted edge key, so existing vertex (and corner) indices are kept.
/// A boundary midpoint inherits the tag of the edge's start vertex in
/// counter-clockwise order, i.e. the boundary segment the edge lies on.
pub fn uniform_refine(mesh: &TriMesh) -> TriMesh {
    let split = split(mesh, mesh.vertices());
    let reference = mesh.reference().map(|r| split_positions(mesh, r));
    TriMesh::from_parts_unchecked(
        split.vertices,
        split.triangles,
        split.boundary,
        mesh.corners().to_vec(),
        mesh.level() + 1,
        reference,
    )
}

/// Uniform refinement followed by a radial remap around `corner`.
///
/// Vertices at distance `r < R` ([`GRADING_RADIUS`]) from the corner, taken
/// in their ungraded positions, move to distance `R (r / R)^(1 / mu)`. Local
/// element sizes then scale like `h (r / R)^(1 - mu)` and the smallest one
/// like `h^(1 / mu)`. The ungraded positions are kept so that repeated
/// grading does not compound.
pub fn graded_refine(mesh: &TriMesh, corner: usize, mu: f64) -> Result<TriMesh> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "grading exponent {mu} is not in (0, 1]"
        )));
    }
    let c = mesh.corner(corner)?.corner.vertex;
    if mu == 1.0 && mesh.reference().is_none() {
        return Ok(uniform_refine(mesh));
    }
    let base = mesh.reference().unwrap_or(mesh.vertices());
    let split = split(mesh, base);
    let reference = split.vertices.clone();
    let vertices = reference
        .iter()
        .map(|&p| {
            let r = p.distance(c);
            if r < GRADING_RADIUS && r > 0.0 {
                c + (p - c) * (r / GRADING_RADIUS).powf(1.0 / mu - 1.0)
            } else {
                p
            }
        })
        .collect();
    let graded = TriMesh::from_parts_unchecked(
        vertices,
        split.triangles,
        split.boundary,
        mesh.corners().to_vec(),
        mesh.level() + 1,
        Some(reference),
    );
    graded.audit()?;
    Ok(graded)
}

fn split(mesh: &TriMesh, positions: &[Point2]) -> Split {
    let edges = mesh.edges();
    let nv = mesh.n_vertices();
    let mut midpoint = BTreeMap::new();
    let mut vertices = positions.to_vec();
    let mut boundary = mesh.boundary().to_vec();
    for (k, (&(a, b), edge)) in edges.iter().enumerate() {
        midpoint.insert((a, b), nv + k);
        vertices.push(positions[a].midpoint(positions[b]));
        if !edge.is_boundary() {
            boundary.push(BoundaryTag::Interior);
        } else {
            // the only triangle on a boundary edge runs along the boundary loop
            let t = edge.triangles[0].expect("every edge has a triangle");
            let tri = mesh.triangles()[t];
            let start = (0..3)
                .map(|i| (tri[i], tri[(i + 1) % 3]))
                .find(|&(p, q)| (p.min(q), p.max(q)) == (a, b))
                .map(|(p, _)| p)
                .expect("edge belongs to its triangle");
            boundary.push(mesh.boundary()[start]);
        }
    }
    let mid = |p: usize, q: usize| midpoint[&(p.min(q), p.max(q))];
    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    for &[a, b, c] in mesh.triangles() {
        let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    Split {
        vertices,
        triangles,
        boundary,
    }
}

fn split_positions(mesh: &TriMesh, positions: &[Point2]) -> Vec<Point2> {
    let mut out = positions.to_vec();
    for &(a, b) in mesh.edges().keys() {
        out.push(positions[a].midpoint(positions[b]));
    }
    out
}
