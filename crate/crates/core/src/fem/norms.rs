//! Errors between an exact function and a P1 field.

use alloc::format;
use num_traits::Float;

use super::assembly::{corner_slot, element_gradients};
use super::{QuadratureRule, ScalarField};
use crate::error::{Error, Result};
use crate::mesh::TriMesh;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    /// `(int r^{2 alpha} (u - v)^2)^{1/2}` with `r` the distance to a corner.
    WeightedL2 { alpha: f64, corner: usize },
    H1Semi,
    /// Largest nodal difference.
    LinfNodal,
    /// L2 norm over the part of the domain farther than `radius` from a corner.
    L2Outside { radius: f64, corner: usize },
}

/// `|| u - v_h ||` in the requested norm.
pub fn error_norm(
    mesh: &TriMesh,
    v_h: &[f64],
    u: &impl ScalarField,
    kind: NormKind,
    rule: &QuadratureRule,
) -> Result<f64> {
    if v_h.len() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_vertices(),
            found: v_h.len(),
        });
    }
    if let NormKind::LinfNodal = kind {
        return Ok(mesh
            .vertices()
            .iter()
            .zip(v_h)
            .map(|(&x, v)| (u.value(x) - v).abs())
            .fold(0.0, f64::max));
    }
    let center = match kind {
        NormKind::WeightedL2 { alpha, corner } => {
            if !(0.0..1.0).contains(&alpha) {
                return Err(Error::InvalidParameter(format!("weight exponent {alpha} not in [0, 1)")));
            }
            Some(mesh.corner(corner)?.corner.vertex)
        }
        NormKind::L2Outside { corner, .. } => Some(mesh.corner(corner)?.corner.vertex),
        _ => None,
    };
    let mut total = 0.0;
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangles()[t];
        let (_, grads) = element_gradients(mesh.triangle_points(t))
            .ok_or(Error::DegenerateTriangle { triangle: t })?;
        let mut missing = false;
        rule.for_each_point(mesh.triangle_points(t), corner_slot(mesh, t), |x, bary, w| {
            let value = match kind {
                NormKind::H1Semi => {
                    let Some(g) = u.gradient(x) else {
                        missing = true;
                        return;
                    };
                    let mut dx = g[0];
                    let mut dy = g[1];
                    for k in 0..3 {
                        dx -= v_h[tri[k]] * grads[k][0];
                        dy -= v_h[tri[k]] * grads[k][1];
                    }
                    dx * dx + dy * dy
                }
                _ => {
                    let vh = bary[0] * v_h[tri[0]] + bary[1] * v_h[tri[1]] + bary[2] * v_h[tri[2]];
                    let e = u.value(x) - vh;
                    match (kind, center) {
                        (NormKind::WeightedL2 { alpha, .. }, Some(c)) => {
                            x.distance(c).powf(2.0 * alpha) * e * e
                        }
                        (NormKind::L2Outside { radius, .. }, Some(c)) => {
                            if x.distance(c) > radius {
                                e * e
                            } else {
                                0.0
                            }
                        }
                        _ => e * e,
                    }
                }
            };
            total += w * value;
        });
        if missing {
            return Err(Error::MissingGradient);
        }
    }
    if !total.is_finite() {
        return Err(Error::InvalidParameter("error integrand is not finite".into()));
    }
    Ok(total.sqrt())
}
