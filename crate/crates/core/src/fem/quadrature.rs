//! Symmetric quadrature on triangles and corner-graded element integration.

use alloc::vec;
use alloc::vec::Vec;

use crate::mesh::Point2;

/// Triangle quadrature rule in barycentric coordinates.
///
/// Weights are normalised to sum to one, so an integral over a triangle
/// of area `A` is `A * sum(w_q f(x_q))`. Elements touching a corner vertex
/// are split `corner_levels` times towards the corner before the rule is
/// applied (see [`QuadratureRule::for_each_point`]).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// Highest total polynomial degree integrated exactly.
    pub degree: u32,
    pub corner_levels: u32,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule::degree4()
    }
}

impl QuadratureRule {
    pub fn centroid() -> Self {
        QuadratureRule {
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![1.0],
            degree: 1,
            corner_levels: 0,
        }
    }

    /// Vertex rule: exact for linears, gives the lumped mass for P1.
    pub fn vertex() -> Self {
        QuadratureRule {
            points: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            weights: vec![1.0 / 3.0; 3],
            degree: 1,
            corner_levels: 0,
        }
    }

    /// Three interior points, exact for quadratics.
    pub fn degree2() -> Self {
        let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
        QuadratureRule {
            points: vec![[a, b, b], [b, a, b], [b, b, a]],
            weights: vec![1.0 / 3.0; 3],
            degree: 2,
            corner_levels: 0,
        }
    }

    /// Six-point Dunavant rule, exact for quartics, with three corner levels.
    pub fn degree4() -> Self {
        let mut rule = QuadratureRule {
            points: Vec::new(),
            weights: Vec::new(),
            degree: 4,
            corner_levels: 3,
        };
        rule.push_orbit(0.445_948_490_915_965, 0.223_381_589_678_011);
        rule.push_orbit(0.091_576_213_509_771, 0.109_951_743_655_322);
        rule
    }

    /// Seven-point rule, exact for quintics, with three corner levels.
    pub fn degree5() -> Self {
        let mut rule = QuadratureRule {
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![0.225],
            degree: 5,
            corner_levels: 3,
        };
        let s = 15f64.sqrt();
        rule.push_orbit((6.0 - s) / 21.0, (155.0 - s) / 1200.0);
        rule.push_orbit((6.0 + s) / 21.0, (155.0 + s) / 1200.0);
        rule
    }

    pub fn with_corner_levels(mut self, levels: u32) -> Self {
        self.corner_levels = levels;
        self
    }

    fn push_orbit(&mut self, a: f64, w: f64) {
        let b = 1.0 - 2.0 * a;
        for p in [[b, a, a], [a, b, a], [a, a, b]] {
            self.points.push(p);
            self.weights.push(w);
        }
    }

    /// Visits the quadrature points of triangle `tri`.
    ///
    /// The callback receives the global point, its barycentric coordinates
    /// in `tri` and the weight including the area. When `corner` is the
    /// local index of a singular vertex, the triangle is split into four
    /// and the child at that vertex is split again, `corner_levels` times.
    pub fn for_each_point<F: FnMut(Point2, [f64; 3], f64)>(
        &self,
        tri: [Point2; 3],
        corner: Option<usize>,
        mut f: F,
    ) {
        let area = 0.5 * (tri[1] - tri[0]).cross(tri[2] - tri[0]);
        let unit = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        match corner {
            Some(k) if self.corner_levels > 0 => {
                self.visit_graded(&tri, area, unit, k, self.corner_levels, &mut f)
            }
            _ => self.visit(&tri, area, unit, &mut f),
        }
    }

    fn visit<F: FnMut(Point2, [f64; 3], f64)>(
        &self,
        tri: &[Point2; 3],
        area: f64,
        sub: [[f64; 3]; 3],
        f: &mut F,
    ) {
        for (p, &w) in self.points.iter().zip(&self.weights) {
            let mut bary = [0.0; 3];
            for (k, bk) in bary.iter_mut().enumerate() {
                *bk = p[0] * sub[0][k] + p[1] * sub[1][k] + p[2] * sub[2][k];
            }
            let x = Point2::new(
                bary[0] * tri[0].x + bary[1] * tri[1].x + bary[2] * tri[2].x,
                bary[0] * tri[0].y + bary[1] * tri[1].y + bary[2] * tri[2].y,
            );
            f(x, bary, w * area);
        }
    }

    /// Like [`QuadratureRule::for_each_point`], but a piece is split into
    /// four while `split(piece, depth)` holds. Use it for integrands with a
    /// kink along a curve crossing the element.
    pub fn for_each_point_split<S, F>(&self, tri: [Point2; 3], mut split: S, mut f: F)
    where
        S: FnMut(&[Point2; 3], u32) -> bool,
        F: FnMut(Point2, [f64; 3], f64),
    {
        let area = 0.5 * (tri[1] - tri[0]).cross(tri[2] - tri[0]);
        let unit = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        self.visit_split(&tri, area, unit, 0, &mut split, &mut f);
    }

    fn visit_split<S, F>(&self, tri: &[Point2; 3], area: f64, sub: [[f64; 3]; 3], depth: u32, split: &mut S, f: &mut F)
    where
        S: FnMut(&[Point2; 3], u32) -> bool,
        F: FnMut(Point2, [f64; 3], f64),
    {
        let at = |b: [f64; 3]| {
            Point2::new(
                b[0] * tri[0].x + b[1] * tri[1].x + b[2] * tri[2].x,
                b[0] * tri[0].y + b[1] * tri[1].y + b[2] * tri[2].y,
            )
        };
        let piece = [at(sub[0]), at(sub[1]), at(sub[2])];
        if !split(&piece, depth) {
            return self.visit(tri, area, sub, f);
        }
        let mid = |a: [f64; 3], b: [f64; 3]| {
            [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])]
        };
        let (a, b, c) = (sub[0], sub[1], sub[2]);
        let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
        let quarter = 0.25 * area;
        for child in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
            self.visit_split(tri, quarter, child, depth + 1, split, f);
        }
    }

    fn visit_graded<F: FnMut(Point2, [f64; 3], f64)>(
        &self,
        tri: &[Point2; 3],
        area: f64,
        sub: [[f64; 3]; 3],
        corner: usize,
        levels: u32,
        f: &mut F,
    ) {
        if levels == 0 {
            return self.visit(tri, area, sub, f);
        }
        let mid = |a: [f64; 3], b: [f64; 3]| {
            [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])]
        };
        let (a, b, c) = (sub[corner], sub[(corner + 1) % 3], sub[(corner + 2) % 3]);
        let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
        let quarter = 0.25 * area;
        self.visit(tri, quarter, [ab, b, bc], f);
        self.visit(tri, quarter, [ca, bc, c], f);
        self.visit(tri, quarter, [ab, bc, ca], f);
        // keep the corner in the same local slot
        let mut inner = [[0.0; 3]; 3];
        inner[corner] = a;
        inner[(corner + 1) % 3] = ab;
        inner[(corner + 2) % 3] = ca;
        self.visit_graded(tri, quarter, inner, corner, levels - 1, f);
    }
}
