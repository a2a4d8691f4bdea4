//! Driver for a full time integration.

use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;

use super::{ParabolicProblem, SchemeConfig, Stepper, TimeGrid};
use crate::correction::modified_ritz;
use crate::error::{Error, Result};
use crate::fem::{interpolate, CgOptions, DiagonalMatrix, FieldVector};
use crate::mesh::Point2;

/// A run is aborted once `max |U^n|` exceeds this multiple of
/// `1 + max |U^0|`.
pub const BLOW_UP_FACTOR: f64 = 1e12;

/// Receives the state after each step (and the initial state as step 0).
pub trait Observer {
    fn observe(&mut self, step: usize, t: f64, state: &[f64]) -> Result<()>;
}

impl<F: FnMut(usize, f64, &[f64]) -> Result<()>> Observer for F {
    fn observe(&mut self, step: usize, t: f64, state: &[f64]) -> Result<()> {
        self(step, t, state)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// `U^N`.
    pub state: FieldVector,
    /// `U^{N-1}`.
    pub previous: FieldVector,
    pub dt: f64,
    pub steps: usize,
    pub t_end: f64,
}

/// `sqrt(U^T M U)`.
pub fn mass_norm(m: &DiagonalMatrix, u: &[f64]) -> f64 {
    m.values().iter().zip(u).map(|(d, v)| d * v * v).sum::<f64>().sqrt()
}

fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Integrates `problem` over `grid`.
///
/// The initial state is the modified Ritz projection of `u0` when a
/// correction is configured and the nodal interpolant otherwise. The step
/// size is not checked against the stability limit; an unstable run ends
/// with [`Error::Instability`].
pub fn run(
    problem: &ParabolicProblem<'_>,
    scheme: &SchemeConfig,
    grid: &TimeGrid,
    observers: &mut [&mut dyn Observer],
) -> Result<RunOutput> {
    let mesh = problem.mesh;
    let stepper = Stepper::new(problem, *scheme, grid.dt())?;
    let u0 = |x: Point2| (problem.u0)(x);
    let boundary = stepper.boundary(0.0);
    for (&v, &g) in stepper.dofs().constrained().iter().zip(&boundary) {
        let x = mesh.vertices()[v];
        if (u0(x) - g).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "initial value {} and boundary value {g} differ at ({}, {})",
                u0(x),
                x.x,
                x.y
            )));
        }
    }
    let mut state = if problem.correction.is_empty() {
        interpolate(mesh, &u0)
    } else {
        let g0 = |x: Point2| problem.g.eval(0.0, x);
        modified_ritz(mesh, &problem.correction, &u0, &g0, &CgOptions::default().with_tol(1e-12))?
    };
    for (&v, &g) in stepper.dofs().constrained().iter().zip(&boundary) {
        state[v] = g;
    }
    let limit = BLOW_UP_FACTOR * (1.0 + max_abs(&state));
    for obs in observers.iter_mut() {
        obs.observe(0, 0.0, &state)?;
    }
    let mut previous = state.clone();
    for n in 0..grid.n_steps() {
        let next = stepper.step(&state, grid.t(n))?;
        let size = max_abs(&next);
        if !size.is_finite() || size > limit || next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Instability {
                step: n + 1,
                t: grid.t(n + 1),
            });
        }
        previous = core::mem::replace(&mut state, next);
        for obs in observers.iter_mut() {
            obs.observe(n + 1, grid.t(n + 1), &state)?;
        }
    }
    Ok(RunOutput {
        state,
        previous,
        dt: grid.dt(),
        steps: grid.n_steps(),
        t_end: grid.t_end(),
    })
}
