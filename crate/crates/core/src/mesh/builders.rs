//! Structured coarse meshes of the two test domains.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use num_traits::Float;

use super::{BoundaryTag, MeshCorner, Point2, ReentrantCorner, TriMesh};
use crate::error::{Error, Result};

/// Vertices of the triangular hole of the notched rectangle: the two
/// 45-degree vertices followed by the right-angle vertex.
pub const NOTCH_HOLE: [Point2; 3] = [
    Point2::new(1.0, 1.0),
    Point2::new(3.0, 1.0),
    Point2::new(2.0, 2.0),
];

const ON_SEGMENT_TOL: f64 = 1e-12;

/// Coarse L-shape `(-1, 1)^2 \ [0, 1] x [-1, 0]` with 2 x 2 squares per unit square.
pub fn build_l_shape() -> TriMesh {
    l_shape(2).expect("the structured L-shape is valid")
}

/// L-shape with `n` squares per unit length.
///
/// Every square is cut along the diagonal parallel to the diagonal of its
/// unit square that passes through the corner, so the six corner triangles
/// are congruent and the corner patch is symmetric about the bisector.
/// For `n` a power of two this is the uniform refinement of `l_shape(1)`
/// up to vertex numbering.
pub fn l_shape(n: usize) -> Result<TriMesh> {
    if n == 0 {
        return Err(Error::InvalidParameter("l_shape needs n >= 1".into()));
    }
    let n = n as i64;
    let s = 1.0 / n as f64;
    let inside = |i: i64, j: i64| !(i > 0 && j < 0);

    let mut index = BTreeMap::new();
    let mut vertices = Vec::new();
    for j in -n..=n {
        for i in -n..=n {
            if inside(i, j) {
                index.insert((i, j), vertices.len());
                vertices.push(Point2::new(i as f64 * s, j as f64 * s));
            }
        }
    }

    let mut triangles = Vec::new();
    for j in -n..n {
        for i in -n..n {
            if i >= 0 && j < 0 {
                continue;
            }
            let ll = index[&(i, j)];
            let lr = index[&(i + 1, j)];
            let ur = index[&(i + 1, j + 1)];
            let ul = index[&(i, j + 1)];
            if i < 0 && j >= 0 {
                triangles.push([ll, lr, ul]);
                triangles.push([lr, ur, ul]);
            } else {
                triangles.push([ll, lr, ur]);
                triangles.push([ll, ur, ul]);
            }
        }
    }

    let outline = [
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(-1.0, 1.0),
        Point2::new(-1.0, -1.0),
        Point2::new(0.0, -1.0),
    ];
    let boundary = tag_boundary(&vertices, &[&outline]);
    let corner = ReentrantCorner::new(Point2::new(0.0, 0.0), 1.5 * PI, 0.0)?;
    let corners = vec![MeshCorner {
        vertex_index: index[&(0, 0)],
        corner,
    }];
    TriMesh::new(vertices, triangles, boundary, corners)
}

/// Rectangle `(0, 4) x (0, 3)` with the right isosceles triangle [`NOTCH_HOLE`]
/// removed.
///
/// The hole produces two corners of angle `7 pi / 4` and one of angle
/// `3 pi / 2`. The base grid has spacing `1/2` with union-jack diagonals
/// through the even vertices; around the two `7 pi / 4` corners the axis
/// neighbours are pushed out to the diagonal distance so that each corner
/// patch consists of seven congruent isosceles triangles.
pub fn build_notched_rectangle() -> TriMesh {
    notched_rectangle().expect("the structured notched rectangle is valid")
}

fn notched_rectangle() -> Result<TriMesh> {
    let s = 0.5;
    let (nx, ny) = (8i64, 6i64);
    let hole = NOTCH_HOLE;

    let mut index = BTreeMap::new();
    let mut grid = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            index.insert((i, j), grid.len());
            grid.push(Point2::new(i as f64 * s, j as f64 * s));
        }
    }
    let mut triangles = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let ll = index[&(i, j)];
            let lr = index[&(i + 1, j)];
            let ur = index[&(i + 1, j + 1)];
            let ul = index[&(i, j + 1)];
            let cell = if (i + j) % 2 == 0 {
                [[ll, lr, ur], [ll, ur, ul]]
            } else {
                [[ll, lr, ul], [lr, ur, ul]]
            };
            for tri in cell {
                let c = Point2::new(
                    (grid[tri[0]].x + grid[tri[1]].x + grid[tri[2]].x) / 3.0,
                    (grid[tri[0]].y + grid[tri[1]].y + grid[tri[2]].y) / 3.0,
                );
                if !strictly_inside_triangle(c, &hole) {
                    triangles.push(tri);
                }
            }
        }
    }

    // drop vertices swallowed by the hole, keeping the (y, x) ordering
    let mut used = vec![false; grid.len()];
    for tri in &triangles {
        for &v in tri {
            used[v] = true;
        }
    }
    let mut renumber = vec![usize::MAX; grid.len()];
    let mut vertices = Vec::new();
    for (v, p) in grid.iter().enumerate() {
        if used[v] {
            renumber[v] = vertices.len();
            vertices.push(*p);
        }
    }
    for tri in &mut triangles {
        for v in tri.iter_mut() {
            *v = renumber[*v];
        }
    }

    for &apex in &hole[..2] {
        for p in vertices.iter_mut() {
            if (p.distance(apex) - s).abs() < 1e-12 {
                *p = apex + (*p - apex) * SQRT_2;
            }
        }
    }

    let outer = [
        Point2::new(0.0, 0.0),
        Point2::new(4.0, 0.0),
        Point2::new(4.0, 3.0),
        Point2::new(0.0, 3.0),
    ];
    let inner = [hole[0], hole[2], hole[1]];
    let boundary = tag_boundary(&vertices, &[&outer, &inner]);

    let find = |p: Point2| -> Result<usize> {
        vertices
            .iter()
            .position(|q| q.distance(p) < 1e-12)
            .ok_or_else(|| Error::InvalidMesh(format!("missing corner vertex {p:?}")))
    };
    let corners = vec![
        MeshCorner {
            vertex_index: find(hole[0])?,
            corner: ReentrantCorner::new(hole[0], 1.75 * PI, FRAC_PI_4)?,
        },
        MeshCorner {
            vertex_index: find(hole[1])?,
            corner: ReentrantCorner::new(hole[1], 1.75 * PI, PI)?,
        },
        MeshCorner {
            vertex_index: find(hole[2])?,
            corner: ReentrantCorner::new(hole[2], 1.5 * PI, 1.75 * PI)?,
        },
    ];
    TriMesh::new(vertices, triangles, boundary, corners)
}

/// Unit square with `n x n` cells, each cut along its rising diagonal. The
/// whole boundary is Dirichlet and there is no re-entrant corner.
pub fn unit_square(n: usize) -> Result<TriMesh> {
    if n == 0 {
        return Err(Error::InvalidParameter("unit_square needs n >= 1".into()));
    }
    let s = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    let mut boundary = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point2::new(i as f64 * s, j as f64 * s));
            let edge = i == 0 || j == 0 || i == n || j == n;
            boundary.push(if edge { BoundaryTag::Dirichlet(0) } else { BoundaryTag::Interior });
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(vertices, triangles, boundary, Vec::new())
}

fn strictly_inside_triangle(p: Point2, tri: &[Point2; 3]) -> bool {
    let d0 = (tri[1] - tri[0]).cross(p - tri[0]);
    let d1 = (tri[2] - tri[1]).cross(p - tri[1]);
    let d2 = (tri[0] - tri[2]).cross(p - tri[2]);
    (d0 > 1e-12 && d1 > 1e-12 && d2 > 1e-12) || (d0 < -1e-12 && d1 < -1e-12 && d2 < -1e-12)
}

/// Tags vertices lying on the polygon loops as Dirichlet, numbering
/// segments consecutively over all loops. Each segment owns its start
/// point but not its end point. Loops run with the domain on their left,
/// which refinement relies on when tagging new boundary midpoints.
fn tag_boundary(vertices: &[Point2], loops: &[&[Point2]]) -> Vec<BoundaryTag> {
    let mut segments = Vec::new();
    for lp in loops {
        for k in 0..lp.len() {
            segments.push((lp[k], lp[(k + 1) % lp.len()]));
        }
    }
    vertices
        .iter()
        .map(|&p| {
            segments
                .iter()
                .position(|&(a, b)| on_segment_half_open(p, a, b))
                .map_or(BoundaryTag::Interior, |id| BoundaryTag::Dirichlet(id as u32))
        })
        .collect()
}

fn on_segment_half_open(p: Point2, a: Point2, b: Point2) -> bool {
    let d = b - a;
    let len2 = d.dot(d);
    let t = (p - a).dot(d) / len2;
    let dist = (p - a).cross(d).abs() / len2.sqrt();
    dist < ON_SEGMENT_TOL && t > -ON_SEGMENT_TOL && t < 1.0 - ON_SEGMENT_TOL
}
