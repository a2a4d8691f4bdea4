//! Stress-intensity factor extraction and post-processing.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use super::{modified_ritz, CorrectionConfig};
use crate::error::{Error, Result};
use crate::fem::{corner_slot, error_norm, CgOptions, FieldVector, NormKind, QuadratureRule, ScalarField};
use crate::mesh::{Point2, TriMesh};
use crate::singular::SingularFunction;

/// Splitting depth for elements crossed by a cutoff circle.
const MAX_SPLIT_DEPTH: u32 = 6;

fn check_dual(mesh: &TriMesh, dual: &SingularFunction) -> Result<()> {
    let Some(eta) = dual.eta else {
        return Err(Error::InvalidParameter("extraction needs a dual function with a cutoff".into()));
    };
    if dual.n >= 0 {
        return Err(Error::InvalidParameter("extraction needs a dual function (n < 0)".into()));
    }
    // the annulus must not reach any boundary edge other than the corner edges
    let probe = SingularFunction::new(-dual.n, dual.corner)?.with_cutoff(eta);
    super::energy::singular_energy(mesh, &probe).map(|_| ())
}

/// Distance from `c` to the closed triangle `pts`.
fn triangle_distance(c: Point2, pts: [Point2; 3]) -> f64 {
    let inside = (0..3).all(|k| (pts[(k + 1) % 3] - pts[k]).cross(c - pts[k]) >= 0.0);
    if inside {
        return 0.0;
    }
    (0..3)
        .map(|k| {
            let (p, q) = (pts[k], pts[(k + 1) % 3]);
            let d = q - p;
            let s = ((c - p).dot(d) / d.dot(d)).clamp(0.0, 1.0);
            c.distance(p + d * s)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `-(1/(n pi)) [int source * s_{-n} + int u_h Lap s_{-n}]` where `source`
/// is `f` minus an optional nodal time derivative.
fn extract(
    mesh: &TriMesh,
    u_h: &[f64],
    f: &impl ScalarField,
    rate: Option<&[f64]>,
    dual: &SingularFunction,
) -> Result<f64> {
    check_dual(mesh, dual)?;
    if u_h.len() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_vertices(),
            found: u_h.len(),
        });
    }
    let eta = dual.eta.expect("checked above");
    let rule = QuadratureRule::default();
    let c = dual.corner.vertex;
    let mut total = 0.0;
    let mut failure = None;
    for t in 0..mesh.n_triangles() {
        let pts = mesh.triangle_points(t);
        if triangle_distance(c, pts) >= eta.r1 {
            continue;
        }
        let tri = mesh.triangles()[t];
        let far = pts.iter().map(|p| p.distance(c)).fold(0.0, f64::max);
        let touches_annulus = far > eta.r0;
        let mut visit = |x: Point2, bary: [f64; 3], w: f64| {
            let interp = |v: &[f64]| bary[0] * v[tri[0]] + bary[1] * v[tri[1]] + bary[2] * v[tri[2]];
            let mut source = f.value(x);
            if let Some(r) = rate {
                source -= interp(r);
            }
            let s = match dual.eval(x) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    return;
                }
            };
            let mut integrand = source * s;
            if touches_annulus {
                match dual.laplacian_dual(x) {
                    Ok(lap) => integrand += interp(u_h) * lap,
                    Err(e) => {
                        failure.get_or_insert(e);
                        return;
                    }
                }
            }
            total += w * integrand;
        };
        if touches_annulus {
            // the Laplacian of the dual has kinks on both cutoff circles
            let corner_slot = corner_slot(mesh, t);
            rule.for_each_point_split(
                pts,
                |piece, depth| {
                    let near = triangle_distance(c, *piece);
                    let far = piece.iter().map(|p| p.distance(c)).fold(0.0, f64::max);
                    let cut = [eta.r0, eta.r1].iter().any(|&r| near < r && r < far);
                    let at_corner = corner_slot.is_some() && near == 0.0;
                    (cut && depth < MAX_SPLIT_DEPTH) || (at_corner && depth < rule.corner_levels)
                },
                &mut visit,
            );
        } else {
            rule.for_each_point(pts, corner_slot(mesh, t), &mut visit);
        }
        if let Some(e) = failure {
            return Err(e);
        }
    }
    if !total.is_finite() {
        return Err(Error::NonFiniteValue { x: c.x, y: c.y });
    }
    Ok(-total / (f64::from(-dual.n) * PI))
}

/// `k_1^h = -(1/pi) int (f s_{-1} + u_h Lap s_{-1})`.
pub fn extract_k1_elliptic(
    mesh: &TriMesh,
    u_h: &[f64],
    f: &impl ScalarField,
    dual: &SingularFunction,
) -> Result<f64> {
    extract(mesh, u_h, f, None, dual)
}

/// As [`extract_k1_elliptic`] with `f` replaced by
/// `f(T) - (u_last - u_prev) / dt`.
pub fn extract_k1_parabolic(
    mesh: &TriMesh,
    u_last: &[f64],
    u_prev: &[f64],
    dt: f64,
    f_at_t: &impl ScalarField,
    dual: &SingularFunction,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("time step {dt} must be positive")));
    }
    if u_prev.len() != u_last.len() {
        return Err(Error::DimensionMismatch {
            expected: u_last.len(),
            found: u_prev.len(),
        });
    }
    let rate: Vec<f64> = u_last.iter().zip(u_prev).map(|(a, b)| (a - b) / dt).collect();
    extract(mesh, u_last, f_at_t, Some(&rate), dual)
}

/// `u_h - k1h s1h + k1h s1`: a P1 part plus an analytic multiple of `s1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PostProcessed {
    pub discrete: FieldVector,
    pub k1h: f64,
    pub s1: SingularFunction,
}

impl PostProcessed {
    pub fn value_at(&self, mesh: &TriMesh, t: usize, bary: [f64; 3], x: Point2) -> f64 {
        let tri = mesh.triangles()[t];
        let d: f64 = (0..3).map(|k| bary[k] * self.discrete[tri[k]]).sum();
        d + self.k1h * self.s1.value(x)
    }

    /// Error of the post-processed field against `u` in the given norm.
    pub fn error_norm(&self, mesh: &TriMesh, u: &impl ScalarField, kind: NormKind, rule: &QuadratureRule) -> Result<f64> {
        let shifted = Shifted { u, k: self.k1h, s1: &self.s1 };
        error_norm(mesh, &self.discrete, &shifted, kind, rule)
    }
}

struct Shifted<'a, U> {
    u: &'a U,
    k: f64,
    s1: &'a SingularFunction,
}

impl<U: ScalarField> ScalarField for Shifted<'_, U> {
    fn value(&self, x: Point2) -> f64 {
        self.u.value(x) - self.k * self.s1.value(x)
    }

    fn gradient(&self, x: Point2) -> Option<[f64; 2]> {
        let g = self.u.gradient(x)?;
        let s = self.s1.gradient(x)?;
        Some([g[0] - self.k * s[0], g[1] - self.k * s[1]])
    }
}

/// Post-processing with a precomputed modified Ritz projection `s1h` of `s1`.
pub fn post_process_with(u_h: &[f64], s1h: &[f64], k1h: f64, s1: SingularFunction) -> Result<PostProcessed> {
    if u_h.len() != s1h.len() {
        return Err(Error::DimensionMismatch {
            expected: u_h.len(),
            found: s1h.len(),
        });
    }
    Ok(PostProcessed {
        discrete: u_h.iter().zip(s1h).map(|(u, s)| u - k1h * s).collect(),
        k1h,
        s1,
    })
}

/// Post-processing; computes `s1h` as the modified Ritz projection of `s1`
/// with boundary values of `s1`.
pub fn post_process(
    mesh: &TriMesh,
    cfgs: &[CorrectionConfig],
    s1: SingularFunction,
    u_h: &[f64],
    k1h: f64,
) -> Result<PostProcessed> {
    let s1h = modified_ritz(mesh, cfgs, &s1, &s1, &CgOptions::default().with_tol(1e-12))?;
    post_process_with(u_h, &s1h, k1h, s1)
}
