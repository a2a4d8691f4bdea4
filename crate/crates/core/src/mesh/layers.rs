//! Element layers around a corner.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::{BoundaryTag, MeshCorner, TriMesh};
use crate::error::{Error, Result};

/// Rings of triangles around a corner vertex.
///
/// `layers[0]` holds the triangles touching the corner; `layers[i]` holds
/// the triangles sharing a vertex with `layers[i - 1]` that are not in an
/// inner layer. Each layer is sorted by triangle index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CornerLayers {
    pub corner_index: usize,
    pub layers: Vec<Vec<usize>>,
}

impl CornerLayers {
    pub fn k(&self) -> usize {
        self.layers.len()
    }

    /// Vertices of all triangles in the layers.
    pub fn vertices(&self, mesh: &TriMesh) -> BTreeSet<usize> {
        self.layers
            .iter()
            .flatten()
            .flat_map(|&t| mesh.triangles()[t])
            .collect()
    }
}

pub fn corner_layers(mesh: &TriMesh, corner: usize, k: usize) -> Result<CornerLayers> {
    if k == 0 {
        return Err(Error::InvalidParameter("at least one corner layer is needed".into()));
    }
    let apex = mesh.corner(corner)?.vertex_index;
    let mut used = vec![false; mesh.n_triangles()];
    let mut front: BTreeSet<usize> = BTreeSet::from([apex]);
    let mut layers = Vec::with_capacity(k);
    while layers.len() < k {
        let layer: Vec<usize> = (0..mesh.n_triangles())
            .filter(|&t| !used[t] && mesh.triangles()[t].iter().any(|v| front.contains(v)))
            .collect();
        if layer.is_empty() {
            return Err(Error::LayersExceedMesh {
                requested: k,
                available: layers.len(),
            });
        }
        for &t in &layer {
            used[t] = true;
        }
        front = layer.iter().flat_map(|&t| mesh.triangles()[t]).collect();
        layers.push(layer);
    }
    Ok(CornerLayers {
        corner_index: corner,
        layers,
    })
}

/// The triangles touching a corner as a mesh of their own.
///
/// Every vertex is tagged Dirichlet and the corner is kept as the only
/// corner. Uniform refinement of the patch reproduces the refined mesh near
/// the corner, which makes it a star-shaped stand-in for the corner problem.
pub fn corner_patch(mesh: &TriMesh, corner: usize) -> Result<TriMesh> {
    let c = *mesh.corner(corner)?;
    let layer = &corner_layers(mesh, corner, 1)?.layers[0];
    let mut map = vec![usize::MAX; mesh.n_vertices()];
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(layer.len());
    for &t in layer {
        let mut tri = [0; 3];
        for (slot, &v) in tri.iter_mut().zip(&mesh.triangles()[t]) {
            if map[v] == usize::MAX {
                map[v] = vertices.len();
                vertices.push(mesh.vertices()[v]);
            }
            *slot = map[v];
        }
        triangles.push(tri);
    }
    let boundary = vec![BoundaryTag::Dirichlet(0); vertices.len()];
    let corners = vec![MeshCorner {
        vertex_index: map[c.vertex_index],
        corner: c.corner,
    }];
    Ok(TriMesh::new(vertices, triangles, boundary, corners)?.with_level(1))
}
