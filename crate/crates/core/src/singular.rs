//! Corner singular functions `s_n = eta(r) r^{n pi / theta} sin(n pi phi / theta)`.
//!
//! Negative `n` gives the dual functions. The exponent keeps its sign, so
//! `s_{-n} = eta r^{-n pi / theta} sin(-n pi phi / theta)`; with this
//! convention `int s_n Lap s_{-n} = -n pi` for a cutoff dual and the
//! extraction formula returns `k_n = 1` for `u = s_n`.

use alloc::format;
use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fem::ScalarField;
use crate::mesh::{Point2, ReentrantCorner};

/// Absolute distance below which a point counts as lying on a corner edge,
/// relative to the size of the corner coordinates.
const POSITION_TOLERANCE: f64 = 1e-13;

/// Smooth cutoff: 1 for `r <= r0`, 0 for `r >= r1`, quintic blend in between.
///
/// With `rho = (r - r0) / (r1 - r0)` the blend is
/// `1 - rho^3 (10 - 15 rho + 6 rho^2)`, whose first and second derivatives
/// vanish at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CutoffEta {
    pub r0: f64,
    pub r1: f64,
}

impl CutoffEta {
    pub fn new(r0: f64, r1: f64) -> Result<Self> {
        if !(r0 > 0.0 && r1 > r0 && r1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cutoff radii need 0 < r0 < r1, got r0 = {r0}, r1 = {r1}"
            )));
        }
        Ok(CutoffEta { r0, r1 })
    }

    fn rho(&self, r: f64) -> Option<f64> {
        if r <= self.r0 || r >= self.r1 {
            None
        } else {
            Some((r - self.r0) / (self.r1 - self.r0))
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self.rho(r) {
            Some(p) => 1.0 - p * p * p * (10.0 - 15.0 * p + 6.0 * p * p),
            None if r <= self.r0 => 1.0,
            None => 0.0,
        }
    }

    /// `d eta / d r`.
    pub fn derivative(&self, r: f64) -> f64 {
        self.rho(r).map_or(0.0, |p| {
            -30.0 * p * p * (1.0 - p) * (1.0 - p) / (self.r1 - self.r0)
        })
    }

    /// `d^2 eta / d r^2`.
    pub fn second_derivative(&self, r: f64) -> f64 {
        self.rho(r).map_or(0.0, |p| {
            let w = self.r1 - self.r0;
            -60.0 * p * (1.0 - p) * (1.0 - 2.0 * p) / (w * w)
        })
    }
}

/// `s_n` for one corner, optionally multiplied by a cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SingularFunction {
    pub n: i32,
    pub corner: ReentrantCorner,
    /// `n pi / theta`.
    pub lambda: f64,
    pub eta: Option<CutoffEta>,
}

impl SingularFunction {
    pub fn new(n: i32, corner: ReentrantCorner) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("singular function index must be nonzero".into()));
        }
        Ok(SingularFunction {
            n,
            corner,
            lambda: n as f64 * PI / corner.theta,
            eta: None,
        })
    }

    /// Dual function `s_{-n}` with the given cutoff.
    pub fn dual(n: i32, corner: ReentrantCorner, eta: CutoffEta) -> Result<Self> {
        Ok(SingularFunction::new(-n, corner)?.with_cutoff(eta))
    }

    pub fn with_cutoff(mut self, eta: CutoffEta) -> Self {
        self.eta = Some(eta);
        self
    }

    fn eta_terms(&self, r: f64) -> (f64, f64, f64) {
        match self.eta {
            Some(e) => (e.value(r), e.derivative(r), e.second_derivative(r)),
            None => (1.0, 0.0, 0.0),
        }
    }

    /// Local polar coordinates, or `None` beyond the cutoff radius. Points
    /// outside the support are accepted even when they lie outside the wedge,
    /// as happens behind an interior hole.
    fn local(&self, x: Point2) -> Result<Option<(f64, f64)>> {
        let (r, phi) = self.corner.polar(x);
        if self.eta.is_some_and(|e| r >= e.r1) {
            return Ok(None);
        }
        if self.corner.in_wedge(phi) {
            return Ok(Some((r, phi.min(self.corner.theta))));
        }
        // coordinates carry an absolute rounding error, so very close to the
        // vertex a point on a corner edge can show a large angular excess
        let v = self.corner.vertex;
        let slack = POSITION_TOLERANCE * (1.0 + v.x.abs().max(v.y.abs()));
        let past_end = (phi - self.corner.theta) * r;
        let before_start = (2.0 * PI - phi) * r;
        if past_end <= slack {
            Ok(Some((r, self.corner.theta)))
        } else if before_start <= slack {
            Ok(Some((r, 0.0)))
        } else {
            Err(Error::OutsideWedge { x: x.x, y: x.y })
        }
    }

    pub fn eval(&self, x: Point2) -> Result<f64> {
        let Some((r, phi)) = self.local(x)? else {
            return Ok(0.0);
        };
        if r == 0.0 {
            return if self.lambda > 0.0 {
                Ok(0.0)
            } else {
                Err(Error::SingularPoint { x: x.x, y: x.y })
            };
        }
        let (eta, _, _) = self.eta_terms(r);
        Ok(eta * r.powf(self.lambda) * (self.lambda * phi).sin())
    }

    /// Polar components `(d/dr, r^{-1} d/dphi)`.
    pub fn polar_gradient(&self, x: Point2) -> Result<(f64, f64)> {
        let Some((r, phi)) = self.local(x)? else {
            return Ok((0.0, 0.0));
        };
        if r == 0.0 {
            return Err(Error::SingularPoint { x: x.x, y: x.y });
        }
        let (eta, deta, _) = self.eta_terms(r);
        let l = self.lambda;
        let rl = r.powf(l);
        let (s, c) = (l * phi).sin_cos();
        Ok(((deta * rl + eta * l * rl / r) * s, eta * l * rl / r * c))
    }

    /// Gradient in global coordinates.
    pub fn grad(&self, x: Point2) -> Result<[f64; 2]> {
        let (dr, dphi) = self.polar_gradient(x)?;
        let (_, phi) = self.corner.polar(x);
        let (s, c) = (phi + self.corner.edge_angle).sin_cos();
        Ok([dr * c - dphi * s, dr * s + dphi * c])
    }

    /// Laplacian. Zero where the cutoff is constant, since `r^lambda sin(lambda phi)`
    /// is harmonic; on the cutoff annulus it is `w (eta'' + eta'/r) + 2 eta' dw/dr`.
    pub fn laplacian(&self, x: Point2) -> Result<f64> {
        let Some((r, phi)) = self.local(x)? else {
            return Ok(0.0);
        };
        let Some(eta) = self.eta else {
            if r == 0.0 {
                return Err(Error::SingularPoint { x: x.x, y: x.y });
            }
            return Ok(0.0);
        };
        if r <= eta.r0 || r >= eta.r1 {
            return Ok(0.0);
        }
        let l = self.lambda;
        let rl = r.powf(l);
        let s = (l * phi).sin();
        let (d1, d2) = (eta.derivative(r), eta.second_derivative(r));
        Ok(rl * s * (d2 + d1 / r) + 2.0 * d1 * l * rl / r * s)
    }

    /// Laplacian of a dual function; needs `n < 0` and a cutoff.
    pub fn laplacian_dual(&self, x: Point2) -> Result<f64> {
        if self.n > 0 || self.eta.is_none() {
            return Err(Error::InvalidParameter(
                "laplacian_dual needs a dual function with a cutoff".into(),
            ));
        }
        self.laplacian(x)
    }
}

impl ScalarField for SingularFunction {
    /// NaN outside the wedge, so that assembly reports the point.
    fn value(&self, x: Point2) -> f64 {
        self.eval(x).unwrap_or(f64::NAN)
    }

    fn gradient(&self, x: Point2) -> Option<[f64; 2]> {
        Some(self.grad(x).unwrap_or([f64::NAN; 2]))
    }
}

/// `u = sin(t) s_1 + sin(2t) s_2 - sin(3t) s_3` without cutoff.
///
/// Every term is harmonic, so `f = u_t`, and the Dirichlet data is `u`
/// itself on the whole boundary. The stress-intensity factor is `sin(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Solution {
    pub modes: [SingularFunction; 3],
}

impl Table1Solution {
    pub fn new(corner: ReentrantCorner) -> Result<Self> {
        Ok(Table1Solution {
            modes: [
                SingularFunction::new(1, corner)?,
                SingularFunction::new(2, corner)?,
                SingularFunction::new(3, corner)?,
            ],
        })
    }

    fn combine(&self, c: [f64; 3], x: Point2) -> Result<f64> {
        let mut v = 0.0;
        for (ci, s) in c.iter().zip(&self.modes) {
            v += ci * s.eval(x)?;
        }
        Ok(v)
    }

    pub fn coefficients(t: f64) -> [f64; 3] {
        [t.sin(), (2.0 * t).sin(), -(3.0 * t).sin()]
    }

    pub fn time_derivatives(t: f64) -> [f64; 3] {
        [t.cos(), 2.0 * (2.0 * t).cos(), -3.0 * (3.0 * t).cos()]
    }

    pub fn u(&self, t: f64, x: Point2) -> Result<f64> {
        self.combine(Self::coefficients(t), x)
    }

    pub fn u_t(&self, t: f64, x: Point2) -> Result<f64> {
        self.combine(Self::time_derivatives(t), x)
    }

    /// Forcing `f = u_t - Lap u = u_t`.
    pub fn f(&self, t: f64, x: Point2) -> Result<f64> {
        self.u_t(t, x)
    }

    pub fn grad(&self, t: f64, x: Point2) -> Result<[f64; 2]> {
        let mut g = [0.0; 2];
        for (c, s) in Self::coefficients(t).iter().zip(&self.modes) {
            let gs = s.grad(x)?;
            g[0] += c * gs[0];
            g[1] += c * gs[1];
        }
        Ok(g)
    }

    pub fn k1(t: f64) -> f64 {
        t.sin()
    }
}

/// Centre of the forcing singularity of the advection study.
pub const ADVECTION_SOURCE: Point2 = Point2::new(2.0, 1.5);

/// Advection field of the advection study.
pub const ADVECTION_B: [f64; 2] = [1.0, 1.0];

/// `f = sin(pi t) / |x - (2, 3/2)|^2`.
pub fn advection_forcing(t: f64, x: Point2) -> Result<f64> {
    let d2 = {
        let d = x - ADVECTION_SOURCE;
        d.dot(d)
    };
    if d2 == 0.0 {
        return Err(Error::SingularPoint { x: x.x, y: x.y });
    }
    Ok((PI * t).sin() / d2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ManufacturedKind {
    Table1,
    AdvectionQoi,
}

/// Point values of a manufactured problem; `u` and `u_t` are unknown for
/// the advection study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedValues {
    pub u: Option<f64>,
    pub u_t: Option<f64>,
    pub f: f64,
    pub g: f64,
}

/// Evaluates `(u, u_t, f, g)`. `corner` is the L-shape corner for
/// [`ManufacturedKind::Table1`] and is ignored otherwise.
pub fn manufactured_solution(
    kind: ManufacturedKind,
    corner: ReentrantCorner,
    t: f64,
    x: Point2,
) -> Result<ManufacturedValues> {
    match kind {
        ManufacturedKind::Table1 => {
            let sol = Table1Solution::new(corner)?;
            let u = sol.u(t, x)?;
            let u_t = sol.u_t(t, x)?;
            Ok(ManufacturedValues {
                u: Some(u),
                u_t: Some(u_t),
                f: u_t,
                g: u,
            })
        }
        ManufacturedKind::AdvectionQoi => Ok(ManufacturedValues {
            u: None,
            u_t: None,
            f: advection_forcing(t, x)?,
            g: 0.0,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::GaussLegendre;
    use proptest::prelude::*;

    fn l_corner() -> ReentrantCorner {
        ReentrantCorner::new(Point2::new(0.0, 0.0), 1.5 * PI, 0.0).unwrap()
    }

    fn notch_corner() -> ReentrantCorner {
        ReentrantCorner::new(Point2::new(1.0, 1.0), 1.75 * PI, 0.25 * PI).unwrap()
    }

    fn at(c: &ReentrantCorner, r: f64, phi: f64) -> Point2 {
        c.vertex + c.direction(phi) * r
    }

    #[test]
    fn cutoff_profile() {
        let e = CutoffEta::new(0.25, 0.75).unwrap();
        assert_eq!(e.value(0.1), 1.0);
        assert_eq!(e.value(0.8), 0.0);
        assert!((e.value(0.5) - 0.5).abs() < 1e-15);
        for r in [0.25, 0.75] {
            assert!(e.derivative(r).abs() < 1e-15 && e.second_derivative(r).abs() < 1e-15);
        }
        let mut prev = 1.0;
        for k in 0..=100 {
            let v = e.value(0.25 + 0.005 * k as f64);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        for r in [0.3, 0.45, 0.6, 0.7] {
            let h = 1e-5;
            let fd1 = (e.value(r + h) - e.value(r - h)) / (2.0 * h);
            let fd2 = (e.derivative(r + h) - e.derivative(r - h)) / (2.0 * h);
            assert!((fd1 - e.derivative(r)).abs() < 1e-8);
            assert!((fd2 - e.second_derivative(r)).abs() < 1e-6);
        }
        assert!(CutoffEta::new(0.5, 0.5).is_err());
    }

    #[test]
    fn value_on_bisector() {
        let c = l_corner();
        let s1 = SingularFunction::new(1, c).unwrap();
        assert!((s1.lambda - 2.0 / 3.0).abs() < 1e-15);
        assert!((s1.eval(at(&c, 1.0, 0.75 * PI)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(s1.eval(c.vertex).unwrap(), 0.0);
        let (dr, dphi) = s1.polar_gradient(at(&c, 1.0, 0.75 * PI)).unwrap();
        assert!((dr - 2.0 / 3.0).abs() < 1e-15);
        assert!(dphi.abs() < 1e-15);
    }

    #[test]
    fn dual_outside_cutoff_and_singular_point() {
        let c = l_corner();
        let eta = CutoffEta::new(0.25, 0.75).unwrap();
        let d = SingularFunction::dual(1, c, eta).unwrap();
        assert_eq!(d.eval(at(&c, 0.8, 1.0)).unwrap(), 0.0);
        assert!(matches!(d.eval(c.vertex), Err(Error::SingularPoint { .. })));
        let bare = SingularFunction::new(-1, c).unwrap();
        assert!(matches!(bare.eval(c.vertex), Err(Error::SingularPoint { .. })));
        assert!(bare.laplacian_dual(at(&c, 0.5, 1.0)).is_err());
    }

    #[test]
    fn outside_wedge_is_an_error() {
        let s1 = SingularFunction::new(1, l_corner()).unwrap();
        assert!(matches!(s1.eval(Point2::new(0.5, -0.5)), Err(Error::OutsideWedge { .. })));
    }

    #[test]
    fn gradient_is_homogeneous_near_corner() {
        let c = l_corner();
        let s1 = SingularFunction::new(1, c).unwrap();
        let g = |r: f64| {
            let v = s1.grad(at(&c, r, 1.0)).unwrap();
            v[0].hypot(v[1]).ln()
        };
        let slope = (g(1e-2) - g(1e-4)) / (1e-2f64.ln() - 1e-4f64.ln());
        assert!((slope - (s1.lambda - 1.0)).abs() < 0.01);
    }

    #[test]
    fn manufactured_table1() {
        let c = l_corner();
        let sol = Table1Solution::new(c).unwrap();
        let x = Point2::new(-0.3, 0.4);
        assert_eq!(sol.u(0.0, x).unwrap(), 0.0);
        assert!((Table1Solution::k1(1.0) - 0.841_470_984_807_896_5).abs() < 1e-15);
        let v = manufactured_solution(ManufacturedKind::Table1, c, 0.7, x).unwrap();
        assert_eq!(v.f, v.u_t.unwrap());
        // harmonic: 5-point Laplacian vanishes up to truncation
        let h = 1e-3;
        for &(px, py) in &[(-0.3, 0.4), (0.5, 0.2), (-0.6, -0.7), (-0.1, 0.05)] {
            let p = Point2::new(px, py);
            let u = |q: Point2| sol.u(0.7, q).unwrap();
            let lap = (u(Point2::new(px + h, py)) + u(Point2::new(px - h, py)) + u(Point2::new(px, py + h))
                + u(Point2::new(px, py - h))
                - 4.0 * u(p))
                / (h * h);
            assert!(lap.abs() < 1e-5 / h.max(p.norm().powi(2)), "{lap}");
        }
        // time derivative against a central difference
        let dt = 1e-6;
        let fd = (sol.u(0.7 + dt, x).unwrap() - sol.u(0.7 - dt, x).unwrap()) / (2.0 * dt);
        assert!((fd - sol.u_t(0.7, x).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn advection_forcing_rejects_source() {
        let c = l_corner();
        assert!(manufactured_solution(ManufacturedKind::AdvectionQoi, c, 0.5, ADVECTION_SOURCE).is_err());
        let v = manufactured_solution(ManufacturedKind::AdvectionQoi, c, 0.5, Point2::new(2.0, 2.5)).unwrap();
        assert!((v.f - 1.0).abs() < 1e-15);
        assert_eq!(v.g, 0.0);
        assert!(v.u.is_none());
    }

    /// `int_annulus s_m Lap s_{-n}` by polar tensor Gauss quadrature.
    fn pairing(c: &ReentrantCorner, m: i32, n: i32) -> f64 {
        let eta = CutoffEta::new(0.25, 0.75).unwrap();
        let sm = SingularFunction::new(m, *c).unwrap();
        let dual = SingularFunction::dual(n, *c, eta).unwrap();
        let gauss = GaussLegendre::new(24);
        gauss.integrate_composite(0.25, 0.75, 8, |r| {
            r * gauss.integrate_composite(0.0, c.theta, 8, |phi| {
                let x = at(c, r, phi);
                sm.eval(x).unwrap() * dual.laplacian_dual(x).unwrap()
            })
        })
    }

    #[test]
    fn dual_pairing() {
        for c in [l_corner(), notch_corner()] {
            for n in 1..=3 {
                for m in 1..=3 {
                    let v = pairing(&c, m, n);
                    let expected = if m == n { -(n as f64) * PI } else { 0.0 };
                    assert!((v - expected).abs() < 1e-8, "m {m} n {n}: {v}");
                }
            }
        }
    }

    fn point_in_wedge(c: ReentrantCorner, r: f64, frac: f64) -> Point2 {
        at(&c, r, frac * c.theta)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn gradient_matches_central_differences(
            r in 0.01f64..1.0, frac in 0.0f64..1.0, n in 1i32..=3, cut in proptest::bool::ANY,
        ) {
            let c = l_corner();
            let mut s = SingularFunction::new(if cut { -n } else { n }, c).unwrap();
            if cut {
                s = s.with_cutoff(CutoffEta::new(0.25, 0.75).unwrap());
            }
            let x = point_in_wedge(c, r, frac);
            // keep the stencil inside the wedge
            prop_assume!(frac * c.theta > 2e-4 / r && (1.0 - frac) * c.theta > 2e-4 / r);
            let h = 1e-6;
            let g = s.grad(x).unwrap();
            let fx = (s.eval(x + Point2::new(h, 0.0)).unwrap() - s.eval(x - Point2::new(h, 0.0)).unwrap()) / (2.0 * h);
            let fy = (s.eval(x + Point2::new(0.0, h)).unwrap() - s.eval(x - Point2::new(0.0, h)).unwrap()) / (2.0 * h);
            let scale = g[0].hypot(g[1]).max(1.0);
            prop_assert!((fx - g[0]).abs() <= 1e-6 * scale, "{fx} {}", g[0]);
            prop_assert!((fy - g[1]).abs() <= 1e-6 * scale, "{fy} {}", g[1]);
        }

        #[test]
        fn dual_laplacian_matches_five_point_stencil(r in 0.26f64..0.74, frac in 0.05f64..0.95, n in 1i32..=3) {
            let c = l_corner();
            let d = SingularFunction::dual(n, c, CutoffEta::new(0.25, 0.75).unwrap()).unwrap();
            let x = point_in_wedge(c, r, frac);
            let v = |dx: f64, dy: f64| d.eval(x + Point2::new(dx, dy)).unwrap();
            let stencil = |h: f64| (v(h, 0.0) + v(-h, 0.0) + v(0.0, h) + v(0.0, -h) - 4.0 * v(0.0, 0.0)) / (h * h);
            // Richardson on h and 2h removes the O(h^2) truncation term
            let fd = (4.0 * stencil(1e-3) - stencil(2e-3)) / 3.0;
            let exact = d.laplacian_dual(x).unwrap();
            let scale = exact.abs().max(1.0);
            prop_assert!((fd - exact).abs() <= 1e-5 * scale, "{fd} {exact}");
        }

        #[test]
        fn homogeneity(r in 1e-3f64..1.0, frac in 0.0f64..1.0, scale in 0.1f64..3.0, n in 1i32..=3) {
            for c in [l_corner(), notch_corner()] {
                let s = SingularFunction::new(n, c).unwrap();
                let x = point_in_wedge(c, r, frac);
                let y = c.vertex + (x - c.vertex) * scale;
                let lhs = s.eval(y).unwrap();
                let rhs = scale.powf(s.lambda) * s.eval(x).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + rhs.abs()));
            }
        }

        #[test]
        fn vanishes_on_corner_edges(r in 1e-3f64..2.0, n in -3i32..=3) {
            prop_assume!(n != 0);
            for c in [l_corner(), notch_corner()] {
                let s = SingularFunction::new(n, c).unwrap();
                prop_assert!(s.eval(at(&c, r, 0.0)).unwrap().abs() <= 1e-13);
                prop_assert!(s.eval(at(&c, r, c.theta)).unwrap().abs() <= 1e-13 * (1.0 + r.powf(s.lambda)));
            }
        }
    }
}
