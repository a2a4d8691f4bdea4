//! Largest absolute value of a P1 field, with a recovered estimate of the
//! peak of the underlying smooth function.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::mesh::TriMesh;

/// Neighbourhood radius of the quadratic fit, in local mesh sizes.
const FIT_RADIUS: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Vertex where `|u_h|` is largest.
    pub vertex: usize,
    /// `max |u_h|`, the L-infinity norm of the P1 field.
    pub nodal: f64,
    /// Maximum of a least-squares quadratic fitted around `vertex`, never
    /// below `nodal`. Equal to `nodal` when the fit is not usable (boundary
    /// vertex, no interior extremum within one mesh size).
    pub recovered: f64,
}

/// Peak of `|u_h|`.
///
/// The nodal maximum samples the peak of a smooth solution at an arbitrary
/// offset, which adds an `O(h^2)` error whose constant changes from level
/// to level. The recovered value fits a quadratic to the vertices within
/// `2.5 h` and takes its extremum instead.
pub fn peak_value(mesh: &TriMesh, u_h: &[f64]) -> Result<Peak> {
    if u_h.len() != mesh.n_vertices() || u_h.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_vertices(),
            found: u_h.len(),
        });
    }
    let (vertex, nodal) = u_h
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, v)| if v.abs() > best.1 { (i, v.abs()) } else { best });
    if !nodal.is_finite() {
        let x = mesh.vertices()[vertex];
        return Err(Error::NonFiniteValue { x: x.x, y: x.y });
    }
    let recovered = fit_peak(mesh, u_h, vertex).map_or(nodal, |v| v.max(nodal));
    Ok(Peak { vertex, nodal, recovered })
}

fn fit_peak(mesh: &TriMesh, u_h: &[f64], vertex: usize) -> Option<f64> {
    if mesh.boundary()[vertex].is_boundary() {
        return None;
    }
    let sign = u_h[vertex].signum();
    let h = (0..mesh.n_triangles())
        .filter(|&t| mesh.triangles()[t].contains(&vertex))
        .map(|t| mesh.diameter(t))
        .fold(0.0, f64::max);
    if !(h > 0.0) {
        return None;
    }
    let c = mesh.vertices()[vertex];
    let mut a = [[0.0; 6]; 6];
    let mut b = [0.0; 6];
    let mut count = 0;
    for (x, v) in mesh.vertices().iter().zip(u_h) {
        let d = *x - c;
        if d.norm() > FIT_RADIUS * h {
            continue;
        }
        let (p, q) = (d.x / h, d.y / h);
        let phi = [1.0, p, q, p * p, p * q, q * q];
        for i in 0..6 {
            b[i] += phi[i] * sign * v;
            for j in 0..6 {
                a[i][j] += phi[i] * phi[j];
            }
        }
        count += 1;
    }
    if count < 12 {
        return None;
    }
    let k = solve6(a, b)?;
    // stationary point of k0 + k1 p + k2 q + k3 p^2 + k4 pq + k5 q^2
    let (hxx, hxy, hyy) = (2.0 * k[3], k[4], 2.0 * k[5]);
    let det = hxx * hyy - hxy * hxy;
    if !(det > 0.0 && hxx < 0.0) {
        return None;
    }
    let p = (-k[1] * hyy + k[2] * hxy) / det;
    let q = (-k[2] * hxx + k[1] * hxy) / det;
    if p * p + q * q > 1.0 {
        return None;
    }
    let value = k[0] + k[1] * p + k[2] * q + k[3] * p * p + k[4] * p * q + k[5] * q * q;
    value.is_finite().then_some(value)
}

/// Gaussian elimination with partial pivoting.
fn solve6(mut a: [[f64; 6]; 6], mut b: [f64; 6]) -> Option<[f64; 6]> {
    let scale = a.iter().flatten().fold(0.0, |m: f64, v| m.max(v.abs()));
    for col in 0..6 {
        let pivot = (col..6).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if !(a[pivot][col].abs() > 1e-12 * scale) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..6 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (v, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *v -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 6];
    for row in (0..6).rev() {
        let s: f64 = (row + 1..6).map(|j| a[row][j] * x[j]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}
