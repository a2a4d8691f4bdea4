//! Energy of the first singular function and the correction defect.

use alloc::vec::Vec;
use num_traits::Float;

use super::CorrectionConfig;
use crate::error::{Error, Result};
use crate::fem::{
    assemble_energy_load, assemble_stiffness, dot, solve_spd_from, CgOptions, DofMap,
    SparseMatrix,
};
use crate::gauss::GaussLegendre;
use crate::mesh::{Point2, ReentrantCorner, TriMesh};
use crate::singular::SingularFunction;

const ANGLE_TOL: f64 = 1e-9;

/// Boundary edges oriented with the domain on their left.
fn boundary_edges(mesh: &TriMesh) -> Vec<(Point2, Point2)> {
    let mut out = Vec::new();
    for (&(a, b), edge) in mesh.edges().iter() {
        if !edge.is_boundary() {
            continue;
        }
        let Some(t) = edge.triangles[0] else { continue };
        let tri = mesh.triangles()[t];
        let forward = (0..3).any(|k| tri[k] == a && tri[(k + 1) % 3] == b);
        let (p, q) = (mesh.vertices()[a], mesh.vertices()[b]);
        out.push(if forward { (p, q) } else { (q, p) });
    }
    out
}

fn on_corner_edges(corner: &ReentrantCorner, p: Point2, q: Point2) -> bool {
    let on = |x: Point2| {
        let (r, phi) = corner.polar(x);
        r == 0.0 || phi < ANGLE_TOL || (phi - corner.theta).abs() < ANGLE_TOL
    };
    let (_, pp) = corner.polar(p);
    let (_, pq) = corner.polar(q);
    on(p) && on(q) && ((pp - pq).abs() < ANGLE_TOL || p == corner.vertex || q == corner.vertex)
}

fn segment_distance(c: Point2, p: Point2, q: Point2) -> f64 {
    let d = q - p;
    let s = ((c - p).dot(d) / d.dot(d)).clamp(0.0, 1.0);
    c.distance(p + d * s)
}

/// `a(s, s) = int |grad s|^2` for a first-kind singular function (`n > 0`).
///
/// Without cutoff the domain must be star-shaped with respect to the
/// corner; then `a(s, s) = lambda / 2 int_0^theta R(phi)^{2 lambda} dphi`
/// with `R` the distance to the boundary, evaluated edge by edge. With a
/// cutoff the annulus must lie inside the domain and
/// `a(s, s) = theta / 2 int_0^{r1} ((eta r^lambda)'^2 + lambda^2 eta^2 r^{2 lambda - 2}) r dr`.
pub fn singular_energy(mesh: &TriMesh, s: &SingularFunction) -> Result<f64> {
    if s.n <= 0 {
        return Err(Error::InvalidParameter("energy needs a singular function with n > 0".into()));
    }
    let c = s.corner;
    let l = s.lambda;
    let gauss = GaussLegendre::new(16);
    match s.eta {
        None => {
            let mut signed = 0.0;
            let mut covered = 0.0;
            let mut integral = 0.0;
            for (p, q) in boundary_edges(mesh) {
                if on_corner_edges(&c, p, q) {
                    continue;
                }
                let (a, b) = (p - c.vertex, q - c.vertex);
                let dphi = a.cross(b).atan2(a.dot(b));
                signed += dphi;
                covered += dphi.abs();
                let d = b - a;
                integral += gauss.integrate(0.0, 1.0, |t| {
                    let x = a + d * t;
                    x.dot(x).powf(l - 1.0) * x.cross(d)
                });
            }
            if (covered - c.theta).abs() > 1e-9 || (signed - c.theta).abs() > 1e-9 {
                return Err(Error::NotStarShaped {
                    covered_angle: covered,
                    theta: c.theta,
                });
            }
            Ok(0.5 * l * integral)
        }
        Some(eta) => {
            let distance = boundary_edges(mesh)
                .into_iter()
                .filter(|&(p, q)| !on_corner_edges(&c, p, q))
                .map(|(p, q)| segment_distance(c.vertex, p, q))
                .fold(f64::INFINITY, f64::min);
            if distance < eta.r1 {
                return Err(Error::AnnulusOutsideDomain { r1: eta.r1, distance });
            }
            let inner = l * eta.r0.powf(2.0 * l);
            let blend = gauss.integrate_adaptive(eta.r0, eta.r1, 1e-14, |r| {
                let rl = r.powf(l);
                let e = eta.value(r);
                let radial = eta.derivative(r) * rl + e * l * rl / r;
                let angular = e * l * rl / r;
                (radial * radial + angular * angular) * r
            })?;
            Ok(0.5 * c.theta * (inner + blend))
        }
    }
}

/// Defect `g_h(gamma) = a(s1 - s1h, s1 - s1h) - c_h(s1h, s1h)` on one mesh,
/// where `s1h` is the modified Ritz projection of `s1` with every layer
/// of the corner sharing the parameter `gamma`.
#[derive(Debug, Clone)]
pub struct EnergyDefect {
    h: f64,
    level: u32,
    stiffness: SparseMatrix,
    unit: SparseMatrix,
    free_stiffness: SparseMatrix,
    free_unit: SparseMatrix,
    dofs: DofMap,
    load: Vec<f64>,
    lift: Vec<f64>,
    energy: f64,
    opts: CgOptions,
}

/// One evaluation of the defect.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectValue {
    pub gamma: f64,
    pub value: f64,
    /// Free part of the projection, reusable as a CG starting guess.
    pub free: Vec<f64>,
}

impl EnergyDefect {
    /// Precomputes everything that does not depend on `gamma`.
    pub fn new(mesh: &TriMesh, s1: &SingularFunction, k: usize, energy: f64) -> Result<Self> {
        let corner = (0..mesh.corners().len())
            .find(|&i| mesh.corners()[i].corner == s1.corner)
            .ok_or_else(|| Error::InvalidParameter("singular function corner is not a mesh corner".into()))?;
        let unit = super::build_correction(mesh, &CorrectionConfig {
            corner,
            gammas: alloc::vec![1.0; k],
        })?;
        let stiffness = assemble_stiffness(mesh)?;
        let dofs = DofMap::from_mesh(mesh);
        let load = assemble_energy_load(mesh, s1)?;
        let lift = dofs.lift(mesh, s1);
        if lift.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("singular function is not finite on the boundary".into()));
        }
        Ok(EnergyDefect {
            h: mesh.h(),
            level: mesh.level(),
            free_stiffness: stiffness.submatrix(dofs.free(), dofs.free()),
            free_unit: unit.submatrix(dofs.free(), dofs.free()),
            stiffness,
            unit,
            dofs,
            load,
            lift,
            energy,
            opts: CgOptions::default().with_tol(1e-12),
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Full projection vector from its free part.
    pub fn projection(&self, free: &[f64]) -> Vec<f64> {
        self.dofs.expand(free, &self.lift)
    }

    pub fn evaluate(&self, gamma: f64, start: Option<&[f64]>) -> Result<DefectValue> {
        let a_full = self.stiffness.add_scaled(&self.unit, -gamma)?;
        let a_lift = a_full.mul_vec(&self.lift);
        let rhs: Vec<f64> = self
            .dofs
            .free()
            .iter()
            .map(|&v| self.load[v] - a_lift[v])
            .collect();
        let a = self.free_stiffness.add_scaled(&self.free_unit, -gamma)?;
        let zero;
        let x0 = match start {
            Some(x) => x,
            None => {
                zero = alloc::vec![0.0; rhs.len()];
                &zero
            }
        };
        let sol = solve_spd_from(&a, &rhs, x0, &self.opts)?;
        let w = self.projection(&sol.x);
        let value = self.energy - 2.0 * dot(&self.load, &w) + self.stiffness.quadratic_form(&w)
            - gamma * self.unit.quadratic_form(&w);
        Ok(DefectValue {
            gamma,
            value,
            free: sol.x,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_stiffness, interpolate};
    use crate::mesh::{build_l_shape, build_notched_rectangle, uniform_refine};
    use crate::singular::CutoffEta;
    use core::f64::consts::PI;

    #[test]
    fn l_shape_energy_matches_angular_integral() {
        let mesh = build_l_shape();
        let c = mesh.corners()[0].corner;
        let s1 = SingularFunction::new(1, c).unwrap();
        let got = singular_energy(&mesh, &s1).unwrap();
        // the boundary is the square of half-width 1, R = 1 / max(|cos|, |sin|)
        let l = s1.lambda;
        let g = GaussLegendre::new(20);
        let mut expected = 0.0;
        for k in 0..6 {
            let a = k as f64 * PI / 4.0;
            expected += g.integrate(a, a + PI / 4.0, |phi| {
                phi.cos().abs().max(phi.sin().abs()).powf(-2.0 * l)
            });
        }
        expected *= 0.5 * l;
        assert!((got - expected).abs() < 1e-13, "{got} {expected}");
        // refining the mesh does not change the geometry
        let fine = singular_energy(&uniform_refine(&mesh), &s1).unwrap();
        assert!((fine - got).abs() < 1e-13);
    }

    #[test]
    fn energy_bounds_discrete_energies() {
        let mut mesh = build_l_shape();
        let c = mesh.corners()[0].corner;
        let s1 = SingularFunction::new(1, c).unwrap();
        let exact = singular_energy(&mesh, &s1).unwrap();
        let mut prev = 0.0;
        for _ in 0..3 {
            mesh = uniform_refine(&mesh);
            // a(s1, I s1) approaches a(s1, s1)
            let r = assemble_energy_load(&mesh, &s1).unwrap();
            let v = dot(&r, &interpolate(&mesh, &s1));
            assert!((v - exact).abs() < (prev - exact).abs() || prev == 0.0);
            prev = v;
        }
        assert!((prev - exact).abs() < 2e-2 * exact);
    }

    #[test]
    fn cutoff_energy_matches_polar_quadrature() {
        let mesh = build_notched_rectangle();
        for mc in mesh.corners() {
            let eta = CutoffEta::new(0.25, 0.75).unwrap();
            let s = SingularFunction::new(1, mc.corner).unwrap().with_cutoff(eta);
            let got = singular_energy(&mesh, &s).unwrap();
            let g = GaussLegendre::new(20);
            let c = mc.corner;
            let expected = g.integrate_composite(1e-12, 0.75, 64, |r| {
                r * g.integrate_composite(0.0, c.theta, 8, |phi| {
                    let x = c.vertex + c.direction(phi) * r;
                    let d = s.grad(x).unwrap();
                    d[0] * d[0] + d[1] * d[1]
                })
            });
            assert!((got - expected).abs() < 1e-6 * expected, "{got} {expected}");
        }
    }

    #[test]
    fn annulus_must_fit() {
        let mesh = build_l_shape();
        let c = mesh.corners()[0].corner;
        let s = SingularFunction::new(1, c).unwrap().with_cutoff(CutoffEta::new(0.5, 1.2).unwrap());
        assert!(matches!(singular_energy(&mesh, &s), Err(Error::AnnulusOutsideDomain { .. })));
    }

    #[test]
    fn notched_domain_is_not_star_shaped() {
        let mesh = build_notched_rectangle();
        let s = SingularFunction::new(1, mesh.corners()[0].corner).unwrap();
        assert!(matches!(singular_energy(&mesh, &s), Err(Error::NotStarShaped { .. })));
    }

    #[test]
    fn zero_gamma_defect_is_error_energy() {
        let mesh = uniform_refine(&build_l_shape());
        let c = mesh.corners()[0].corner;
        let s1 = SingularFunction::new(1, c).unwrap();
        let energy = singular_energy(&mesh, &s1).unwrap();
        let d = EnergyDefect::new(&mesh, &s1, 1, energy).unwrap();
        let g0 = d.evaluate(0.0, None).unwrap();
        assert!(g0.value > 0.0);
        // Galerkin orthogonality with exact boundary values is not available,
        // so compare with the expanded form directly
        let w = d.projection(&g0.free);
        let s = assemble_stiffness(&mesh).unwrap();
        let r = assemble_energy_load(&mesh, &s1).unwrap();
        let direct = energy - 2.0 * dot(&r, &w) + s.quadratic_form(&w);
        assert!((direct - g0.value).abs() < 1e-14);
    }

    #[test]
    fn defect_decreases_in_gamma() {
        let mesh = uniform_refine(&uniform_refine(&build_l_shape()));
        let c = mesh.corners()[0].corner;
        let s1 = SingularFunction::new(1, c).unwrap();
        let energy = singular_energy(&mesh, &s1).unwrap();
        let d = EnergyDefect::new(&mesh, &s1, 1, energy).unwrap();
        let values: Vec<f64> = [0.05, 0.15, 0.25, 0.35, 0.45]
            .iter()
            .map(|&g| d.evaluate(g, None).unwrap().value)
            .collect();
        for w in values.windows(2) {
            assert!(w[1] < w[0], "{values:?}");
        }
    }
}
