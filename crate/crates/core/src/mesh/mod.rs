//! Conforming triangulations with boundary tags and re-entrant-corner metadata.

mod builders;
mod layers;
mod refine;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};
use num_traits::Float;

use crate::error::{Error, Result};

pub use builders::{build_l_shape, build_notched_rectangle, l_shape, unit_square, NOTCH_HOLE};
pub use layers::{corner_layers, corner_patch, CornerLayers};
pub use refine::{graded_refine, uniform_refine, GRADING_RADIUS};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Boundary classification of a vertex. Segment ids number the polygon edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BoundaryTag {
    Interior,
    Dirichlet(u32),
    Neumann(u32),
}

impl BoundaryTag {
    pub fn is_dirichlet(self) -> bool {
        matches!(self, BoundaryTag::Dirichlet(_))
    }

    pub fn is_boundary(self) -> bool {
        !matches!(self, BoundaryTag::Interior)
    }
}

/// A re-entrant corner with its local polar frame.
///
/// The local angle `phi` is measured counter-clockwise from `edge_angle`
/// and ranges over `[0, theta]` inside the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReentrantCorner {
    pub vertex: Point2,
    pub theta: f64,
    pub bisector_angle: f64,
    pub edge_angle: f64,
}

/// Angular tolerance used to classify points on the corner edges.
pub const WEDGE_TOLERANCE: f64 = 1e-12;

impl ReentrantCorner {
    pub fn new(vertex: Point2, theta: f64, edge_angle: f64) -> Result<Self> {
        if !(theta > PI && theta < 2.0 * PI) {
            return Err(Error::InvalidParameter(format!(
                "corner angle {theta} is not in (pi, 2 pi)"
            )));
        }
        Ok(ReentrantCorner {
            vertex,
            theta,
            bisector_angle: normalize_angle(edge_angle + 0.5 * theta),
            edge_angle,
        })
    }

    /// Local polar coordinates `(r, phi)` with `phi` in `[0, 2 pi)`.
    ///
    /// Angles within [`WEDGE_TOLERANCE`] below `2 pi` are folded onto the
    /// first corner edge.
    pub fn polar(&self, p: Point2) -> (f64, f64) {
        let d = p - self.vertex;
        let r = d.norm();
        let mut phi = normalize_angle(d.y.atan2(d.x) - self.edge_angle);
        if 2.0 * PI - phi < WEDGE_TOLERANCE {
            phi = 0.0;
        }
        (r, phi)
    }

    pub fn in_wedge(&self, phi: f64) -> bool {
        phi <= self.theta + WEDGE_TOLERANCE
    }

    /// Global direction of the local angle `phi`.
    pub fn direction(&self, phi: f64) -> Point2 {
        let a = phi + self.edge_angle;
        Point2::new(a.cos(), a.sin())
    }
}

fn normalize_angle(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut a = a % two_pi;
    if a < 0.0 {
        a += two_pi;
    }
    if a >= two_pi {
        a -= two_pi;
    }
    a
}

/// A corner together with the index of the mesh vertex sitting on it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeshCorner {
    pub vertex_index: usize,
    pub corner: ReentrantCorner,
}

/// Edge of a triangulation with the (one or two) adjacent triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub vertices: (usize, usize),
    pub triangles: [Option<usize>; 2],
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles[1].is_none()
    }
}

/// Conforming triangulation; immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryTag>,
    corners: Vec<MeshCorner>,
    level: u32,
    h: f64,
    h_min: f64,
    /// Pre-grading vertex positions of a graded mesh.
    reference: Option<Vec<Point2>>,
}

impl TriMesh {
    /// Builds a mesh and audits orientation and conformity.
    pub fn new(
        vertices: Vec<Point2>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<BoundaryTag>,
        corners: Vec<MeshCorner>,
    ) -> Result<Self> {
        if boundary.len() != vertices.len() {
            return Err(Error::DimensionMismatch {
                expected: vertices.len(),
                found: boundary.len(),
            });
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidMesh(format!("non-finite vertex {p:?}")));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
        }
        for c in &corners {
            if c.vertex_index >= vertices.len()
                || vertices[c.vertex_index].distance(c.corner.vertex) > 1e-12
            {
                return Err(Error::InvalidMesh(format!(
                    "corner at {:?} does not match its vertex",
                    c.corner.vertex
                )));
            }
        }
        let mut mesh = TriMesh {
            vertices,
            triangles,
            boundary,
            corners,
            level: 0,
            h: 0.0,
            h_min: 0.0,
            reference: None,
        };
        mesh.audit()?;
        mesh.update_sizes();
        Ok(mesh)
    }

    pub(crate) fn from_parts_unchecked(
        vertices: Vec<Point2>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<BoundaryTag>,
        corners: Vec<MeshCorner>,
        level: u32,
        reference: Option<Vec<Point2>>,
    ) -> Self {
        let mut mesh = TriMesh {
            vertices,
            triangles,
            boundary,
            corners,
            level,
            h: 0.0,
            h_min: 0.0,
            reference,
        };
        mesh.update_sizes();
        mesh
    }

    fn update_sizes(&mut self) {
        let mut h: f64 = 0.0;
        let mut h_min = f64::INFINITY;
        for t in 0..self.triangles.len() {
            let d = self.diameter(t);
            h = h.max(d);
            h_min = h_min.min(d);
        }
        self.h = h;
        self.h_min = if h_min.is_finite() { h_min } else { 0.0 };
    }

    /// Relabels the refinement generation.
    pub fn with_level(mut self, level: u32) -> Self {
        self.level = level;
        self
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[BoundaryTag] {
        &self.boundary
    }

    pub fn corners(&self) -> &[MeshCorner] {
        &self.corners
    }

    pub fn corner(&self, index: usize) -> Result<&MeshCorner> {
        self.corners.get(index).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "corner {index} out of range ({} corners)",
                self.corners.len()
            ))
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Largest element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Smallest element diameter.
    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub(crate) fn reference(&self) -> Option<&[Point2]> {
        self.reference.as_deref()
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * (b - a).cross(c - a)
    }

    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        a.distance(b).max(b.distance(c)).max(c.distance(a))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    /// Index into [`Self::corners`] if `v` is a corner vertex.
    pub fn corner_at_vertex(&self, v: usize) -> Option<usize> {
        self.corners.iter().position(|c| c.vertex_index == v)
    }

    /// Unique edges keyed by sorted vertex pair, in ascending key order.
    pub fn edges(&self) -> BTreeMap<(usize, usize), Edge> {
        let mut map: BTreeMap<(usize, usize), Edge> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let e = map.entry(key).or_insert(Edge {
                    vertices: key,
                    triangles: [None, None],
                });
                if e.triangles[0].is_none() {
                    e.triangles[0] = Some(t);
                } else if e.triangles[1].is_none() {
                    e.triangles[1] = Some(t);
                }
            }
        }
        map
    }

    /// Checks orientation, conformity and boundary tagging.
    pub fn audit(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.triangle_points(t);
            let area = self.signed_area(t);
            let scale = a.distance(b).max(b.distance(c)).max(c.distance(a));
            if area.abs() <= 1e-14 * scale * scale {
                return Err(Error::DegenerateTriangle { triangle: t });
            }
            if area < 0.0 {
                return Err(Error::InvertedTriangle { triangle: t });
            }
        }
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                *directed.entry((a, b)).or_insert(0) += 1;
            }
        }
        for (&edge, &count) in &counts {
            if count > 2 {
                return Err(Error::NonConforming { edge, count });
            }
        }
        // consistently oriented neighbours traverse a shared edge in opposite directions
        for (&edge, &count) in &directed {
            if count > 1 {
                return Err(Error::NonConforming { edge, count });
            }
        }
        for (&(a, b), &count) in &counts {
            if count == 1 && (!self.boundary[a].is_boundary() || !self.boundary[b].is_boundary())
            {
                return Err(Error::InvalidMesh(format!(
                    "boundary edge ({a}, {b}) has an interior endpoint"
                )));
            }
        }
        Ok(())
    }
}
