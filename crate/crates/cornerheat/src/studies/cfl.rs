//! Explicit Euler stability limit on uniform and graded L-shape meshes.

use std::path::{Path, PathBuf};

use cornerheat_core::correction::CorrectionConfig;
use cornerheat_core::mesh::graded_refine;
use cornerheat_core::parabolic::{
    explicit_dt_limit, mass_norm, run, Forcing, Observer, ParabolicProblem, PowerIterationOptions, SchemeConfig,
    SeparableTerm, Stepper, TimeGrid,
};
use cornerheat_core::singular::SingularFunction;
use cornerheat_core::{Error, Point2, TriMesh};
use serde::Serialize;

use super::{l_shape_hierarchy, resolve_l_shape_gamma, write_json, StudyReport};
use crate::checks::Check;
use crate::config::StudyConfig;
use crate::error::{AtLevel, Result};

/// Grading exponent of the comparison meshes.
pub const GRADING_MU: f64 = 0.6;
pub const STABLE_FACTOR: f64 = 0.9;
pub const UNSTABLE_FACTOR: f64 = 1.05;
/// Steps of the run below the limit.
const STABLE_STEPS: usize = 400;
/// Step budget for the run above the limit to blow up.
const UNSTABLE_STEPS: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CflLevel {
    pub level: u32,
    pub h: f64,
    pub h_min: f64,
    pub dt_max_standard: f64,
    pub dt_max: f64,
    /// `dt_max / h_min^2`.
    pub scaled: f64,
    /// `dt_max` of this level over that of the previous one.
    pub ratio: Option<f64>,
    /// Largest `||U^n||_M / (||U^0||_M + sum_k dt ||M^-1 F^k||_M)` below the limit.
    pub bound_ratio: f64,
    /// Step at which the run above the limit was aborted.
    pub unstable_abort_step: Option<usize>,
    pub graded_h_min: f64,
    pub graded_dt_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CflReport {
    pub config: StudyConfig,
    pub gamma: f64,
    pub mu: f64,
    pub levels: Vec<CflLevel>,
}

/// Vanishes on the L-shape boundary.
fn bump(s1: SingularFunction) -> impl Fn(Point2) -> f64 + Copy {
    move |x: Point2| (1.0 - x.x * x.x) * (1.0 - x.y * x.y) * s1.eval(x).unwrap_or(f64::NAN)
}

fn probe_problem(mesh: &TriMesh, gamma: f64) -> Result<ParabolicProblem<'_>> {
    let s1 = SingularFunction::new(1, mesh.corners()[0].corner)?;
    Ok(ParabolicProblem::new(mesh)
        .with_correction(vec![CorrectionConfig::single(0, gamma)?])
        .with_initial(bump(s1))
        .with_source(Forcing::Separable(vec![SeparableTerm::new(|t: f64| t.cos(), |_| 1.0)])))
}

/// Tracks `||U^n||_M` against the initial norm plus the accumulated forcing.
struct BoundTracker<'s, 'p, 'a> {
    stepper: &'s Stepper<'p, 'a>,
    dt: f64,
    allowance: f64,
    worst: f64,
}

impl Observer for BoundTracker<'_, '_, '_> {
    fn observe(&mut self, step: usize, t: f64, state: &[f64]) -> cornerheat_core::Result<()> {
        let m = self.stepper.lumped_mass();
        let now = mass_norm(m, state);
        if step == 0 {
            self.allowance = now;
        }
        self.worst = self.worst.max(now / self.allowance);
        let f = self.stepper.load(t)?;
        let free = self.stepper.dofs().free();
        let forcing: f64 = free.iter().map(|&v| f[v] * f[v] / m.values()[v]).sum::<f64>().sqrt();
        self.allowance += self.dt * forcing;
        Ok(())
    }
}

fn probe_level(mesh: &TriMesh, graded: &TriMesh, gamma: f64) -> Result<CflLevel> {
    let level = mesh.level();
    let opts = PowerIterationOptions::default();
    let problem = probe_problem(mesh, gamma)?;
    let dt_max = explicit_dt_limit(&problem, &opts).at_level(level)?;
    let dt_max_standard = explicit_dt_limit(&ParabolicProblem::new(mesh), &opts).at_level(level)?;
    let graded_dt_max = explicit_dt_limit(&ParabolicProblem::new(graded), &opts).at_level(level)?;

    let stable = TimeGrid::new(STABLE_STEPS as f64 * STABLE_FACTOR * dt_max, STABLE_STEPS)?;
    let stepper = Stepper::new(&problem, SchemeConfig::default(), stable.dt()).at_level(level)?;
    let mut tracker = BoundTracker {
        stepper: &stepper,
        dt: stable.dt(),
        allowance: 0.0,
        worst: 0.0,
    };
    run(&problem, &SchemeConfig::default(), &stable, &mut [&mut tracker]).at_level(level)?;

    let unstable = TimeGrid::new(UNSTABLE_STEPS as f64 * UNSTABLE_FACTOR * dt_max, UNSTABLE_STEPS)?;
    let unstable_abort_step = match run(&problem, &SchemeConfig::default(), &unstable, &mut []) {
        Err(Error::Instability { step, .. }) => Some(step),
        Ok(_) => None,
        Err(e) => return Err(e).at_level(level),
    };
    Ok(CflLevel {
        level,
        h: mesh.h(),
        h_min: mesh.h_min(),
        dt_max_standard,
        dt_max,
        scaled: dt_max / (mesh.h_min() * mesh.h_min()),
        ratio: None,
        bound_ratio: tracker.worst,
        unstable_abort_step,
        graded_h_min: graded.h_min(),
        graded_dt_max,
    })
}

/// First probed level. Below it no vertex lies strictly inside the
/// grading disc, so graded and uniform meshes coincide.
pub const FIRST_LEVEL: u32 = 3;

/// Probes `cfg.levels` levels starting at [`FIRST_LEVEL`].
pub fn run_cfl_probe(cfg: &StudyConfig) -> Result<CflReport> {
    cfg.validate()?;
    let (gamma, _) = resolve_l_shape_gamma(cfg.gamma)?;
    let meshes = l_shape_hierarchy(cfg.levels + FIRST_LEVEL - 1)?;
    let mut graded = meshes[0].clone();
    let mut levels: Vec<CflLevel> = Vec::new();
    for mesh in &meshes[1..] {
        graded = graded_refine(&graded, 0, GRADING_MU).at_level(mesh.level())?;
        if mesh.level() < FIRST_LEVEL {
            continue;
        }
        let mut probe = probe_level(mesh, &graded, gamma)?;
        probe.ratio = levels.last().map(|p| probe.dt_max / p.dt_max);
        levels.push(probe);
    }
    Ok(CflReport {
        config: cfg.clone(),
        gamma,
        mu: GRADING_MU,
        levels,
    })
}

impl StudyReport for CflReport {
    fn checks(&self) -> Vec<Check> {
        let mut checks = Vec::new();
        for l in &self.levels {
            if let Some(r) = l.ratio {
                checks.push(Check::band(format!("dt_max ratio at level {}", l.level), Some(r), 0.22, 0.28));
            }
            checks.push(Check::new(
                format!("{UNSTABLE_FACTOR} dt_max blows up at level {}", l.level),
                l.unstable_abort_step.is_some(),
                format!("aborted at step {:?}", l.unstable_abort_step),
            ));
            checks.push(Check::new(
                format!("{STABLE_FACTOR} dt_max stays within the bound at level {}", l.level),
                l.bound_ratio <= 1.0 + 1e-10,
                format!("largest norm / bound = {:.6}", l.bound_ratio),
            ));
            checks.push(Check::new(
                format!("graded dt_max below uniform at level {}", l.level),
                l.graded_dt_max < l.dt_max_standard,
                format!("{:.3e} < {:.3e}", l.graded_dt_max, l.dt_max_standard),
            ));
        }
        checks
    }

    fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        Ok(vec![write_json(dir, "cfl_probe.json", self)?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{GammaChoice, StudyKind};

    #[test]
    fn two_level_probe_passes_its_bands() {
        let cfg = StudyConfig::new(StudyKind::CflProbe).with_levels(2).with_gamma(GammaChoice::Value(0.13609));
        let rep = run_cfl_probe(&cfg).unwrap();
        assert_eq!(rep.levels.len(), 2);
        assert!(rep.levels[0].ratio.is_none());
        for c in rep.checks() {
            assert!(c.passed, "{c}");
        }
    }
}
