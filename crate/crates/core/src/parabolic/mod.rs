//! Time integration of the semi-discrete heat (and advection-diffusion)
//! equation with optional energy correction.
//!
//! The semi-discrete system is `M U' + (S - C + B) U = F` on the free
//! vertices, with Dirichlet values imposed strongly at the end of each step.

mod cfl;
mod run;
mod stepper;

pub use cfl::{cfl_max_dt, explicit_dt_limit, PowerIterationOptions};
pub use run::{mass_norm, run, Observer, RunOutput, BLOW_UP_FACTOR};
pub use stepper::Stepper;

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;

use crate::correction::CorrectionConfig;
use crate::error::{Error, Result};
use crate::mesh::{Point2, TriMesh};

/// `N` equal steps on `[0, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) || n_steps == 0 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs t_end > 0 and at least one step (got {t_end}, {n_steps})"
            )));
        }
        Ok(TimeGrid { t_end, n_steps })
    }

    /// Smallest number of equal steps with `dt <= max_dt`.
    pub fn with_max_dt(t_end: f64, max_dt: f64) -> Result<Self> {
        if !(max_dt > 0.0) {
            return Err(Error::InvalidParameter(format!("step size {max_dt} must be positive")));
        }
        let n = (t_end / max_dt * (1.0 - 1e-12)).ceil().max(1.0);
        Self::new(t_end, n as usize)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    /// `t_n = n dt`.
    pub fn t(&self, n: usize) -> f64 {
        if n == self.n_steps {
            self.t_end
        } else {
            n as f64 * self.dt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SchemeKind {
    ExplicitEuler,
    Heun,
    CrankNicolson,
}

impl SchemeKind {
    pub fn is_explicit(self) -> bool {
        !matches!(self, SchemeKind::CrankNicolson)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MassKind {
    /// Row-sum lumped, diagonal.
    Lumped,
    /// Consistent; each step solves with the mass matrix.
    Consistent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub mass: MassKind,
    /// Fraction of the stability limit used when a step size is derived
    /// from it.
    pub cfl_safety: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            kind: SchemeKind::ExplicitEuler,
            mass: MassKind::Lumped,
            cfl_safety: 0.9,
        }
    }
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind) -> Self {
        SchemeConfig {
            kind,
            ..Self::default()
        }
    }

    pub fn with_mass(mut self, mass: MassKind) -> Self {
        self.mass = mass;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl_safety {} not in (0, 1]",
                self.cfl_safety
            )));
        }
        Ok(())
    }

    /// Step size `cfl_safety * dt_max`.
    pub fn safe_dt(&self, dt_max: f64) -> f64 {
        self.cfl_safety * dt_max
    }
}

/// `time(t) * space(x)`.
pub struct SeparableTerm<'a> {
    pub time: Box<dyn Fn(f64) -> f64 + 'a>,
    pub space: Box<dyn Fn(Point2) -> f64 + 'a>,
}

impl<'a> SeparableTerm<'a> {
    pub fn new(time: impl Fn(f64) -> f64 + 'a, space: impl Fn(Point2) -> f64 + 'a) -> Self {
        SeparableTerm {
            time: Box::new(time),
            space: Box::new(space),
        }
    }
}

/// Space-time data, used for the source and the Dirichlet values.
///
/// Separable data is discretised once in space; general data is
/// re-evaluated every time it is needed.
pub enum Forcing<'a> {
    Zero,
    Separable(Vec<SeparableTerm<'a>>),
    General(Box<dyn Fn(f64, Point2) -> f64 + 'a>),
}

impl<'a> Forcing<'a> {
    pub fn general(f: impl Fn(f64, Point2) -> f64 + 'a) -> Self {
        Forcing::General(Box::new(f))
    }

    pub fn eval(&self, t: f64, x: Point2) -> f64 {
        match self {
            Forcing::Zero => 0.0,
            Forcing::Separable(terms) => terms.iter().map(|s| (s.time)(t) * (s.space)(x)).sum(),
            Forcing::General(f) => f(t, x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Forcing::Zero)
    }
}

impl core::fmt::Debug for Forcing<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Forcing::Zero => f.write_str("Zero"),
            Forcing::Separable(t) => write!(f, "Separable({} terms)", t.len()),
            Forcing::General(_) => f.write_str("General"),
        }
    }
}

/// `u_t + b . grad u - Delta u = f` in the domain, `u = g` on the Dirichlet
/// boundary, `u(0) = u0`.
pub struct ParabolicProblem<'a> {
    pub mesh: &'a TriMesh,
    /// Energy correction per corner; empty for the standard scheme.
    pub correction: Vec<CorrectionConfig>,
    pub advection: [f64; 2],
    pub f: Forcing<'a>,
    pub g: Forcing<'a>,
    pub u0: Box<dyn Fn(Point2) -> f64 + 'a>,
}

impl<'a> ParabolicProblem<'a> {
    /// Homogeneous problem without correction or advection.
    pub fn new(mesh: &'a TriMesh) -> Self {
        ParabolicProblem {
            mesh,
            correction: Vec::new(),
            advection: [0.0; 2],
            f: Forcing::Zero,
            g: Forcing::Zero,
            u0: Box::new(|_| 0.0),
        }
    }

    pub fn with_correction(mut self, correction: Vec<CorrectionConfig>) -> Self {
        self.correction = correction;
        self
    }

    pub fn with_advection(mut self, b: [f64; 2]) -> Self {
        self.advection = b;
        self
    }

    pub fn with_source(mut self, f: Forcing<'a>) -> Self {
        self.f = f;
        self
    }

    pub fn with_boundary(mut self, g: Forcing<'a>) -> Self {
        self.g = g;
        self
    }

    pub fn with_initial(mut self, u0: impl Fn(Point2) -> f64 + 'a) -> Self {
        self.u0 = Box::new(u0);
        self
    }

    pub fn has_advection(&self) -> bool {
        self.advection != [0.0, 0.0]
    }
}

impl core::fmt::Debug for ParabolicProblem<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ParabolicProblem")
            .field("vertices", &self.mesh.n_vertices())
            .field("correction", &self.correction)
            .field("advection", &self.advection)
            .field("f", &self.f)
            .field("g", &self.g)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_steps() {
        let g = TimeGrid::new(1.0, 10).unwrap();
        assert!((g.dt() - 0.1).abs() < 1e-16);
        assert_eq!(g.t(10), 1.0);
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(0.0, 3).is_err());
        assert_eq!(TimeGrid::with_max_dt(1.0, 0.1 / 16.0).unwrap().n_steps(), 160);
        assert_eq!(TimeGrid::with_max_dt(1.0, 0.3).unwrap().n_steps(), 4);
    }

    #[test]
    fn separable_forcing_evaluates_the_sum() {
        let f = Forcing::Separable(alloc::vec![
            SeparableTerm::new(|t| t, |x| x.x),
            SeparableTerm::new(|t| 2.0 * t, |x| x.y),
        ]);
        assert_eq!(f.eval(2.0, Point2::new(1.0, 3.0)), 14.0);
        assert_eq!(Forcing::Zero.eval(1.0, Point2::new(1.0, 1.0)), 0.0);
    }

    #[test]
    fn scheme_validation() {
        assert!(SchemeConfig::default().validate().is_ok());
        let mut s = SchemeConfig::default();
        s.cfl_safety = 1.2;
        assert!(s.validate().is_err());
    }
}
