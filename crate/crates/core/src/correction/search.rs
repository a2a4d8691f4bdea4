//! Nested search for the correction parameter.
//!
//! On each mesh of a hierarchy the defect `g_h(gamma)` is driven to zero by
//! a secant iteration kept inside a sign-change bracket. Finer levels start
//! from the root of the previous level.

use alloc::vec::Vec;
use num_traits::Float;

use super::energy::{singular_energy, DefectValue, EnergyDefect};
use crate::error::{Error, Result};
use crate::mesh::{corner_patch, uniform_refine, TriMesh};
use crate::singular::SingularFunction;

/// Upper end of the search bracket.
pub const GAMMA_MAX: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSearchOptions {
    /// Number of corner layers sharing the parameter.
    pub k: usize,
    /// Per-level defect tolerance is `tol_factor * h^2 * |g_h(0)|`.
    pub tol_factor: f64,
    /// Converged when the last level increment is at most this.
    pub increment_tol: f64,
    /// Defect evaluations per level before giving up.
    pub max_evaluations: usize,
}

impl Default for GammaSearchOptions {
    fn default() -> Self {
        GammaSearchOptions {
            k: 1,
            tol_factor: 1e-2,
            increment_tol: 1e-2,
            max_evaluations: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GammaLevel {
    pub level: u32,
    pub h: f64,
    pub gamma: f64,
    pub defect: f64,
    pub iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GammaSearchReport {
    pub levels: Vec<GammaLevel>,
    pub converged: bool,
}

impl GammaSearchReport {
    /// Root on the finest level.
    pub fn gamma(&self) -> f64 {
        self.levels.last().map_or(f64::NAN, |l| l.gamma)
    }

    /// `|gamma_L - gamma_{L-1}|` for consecutive levels.
    pub fn increments(&self) -> Vec<f64> {
        self.levels
            .windows(2)
            .map(|w| (w[1].gamma - w[0].gamma).abs())
            .collect()
    }
}

/// Searches the parameter zeroing the defect of `s1` on every mesh of
/// `meshes` (coarse to fine, at least three).
///
/// The report counts as converged when the last increment is below
/// `increment_tol` and the last three increments strictly decrease.
pub fn find_gamma(
    meshes: &[TriMesh],
    s1: &SingularFunction,
    opts: &GammaSearchOptions,
) -> Result<GammaSearchReport> {
    if meshes.len() < 3 {
        return Err(Error::InvalidParameter("gamma search needs at least three levels".into()));
    }
    let energy = singular_energy(&meshes[0], s1)?;
    let mut levels: Vec<GammaLevel> = Vec::with_capacity(meshes.len());
    for mesh in meshes {
        let defect = EnergyDefect::new(mesh, s1, opts.k, energy)?;
        let start = levels.last().map(|l| l.gamma);
        levels.push(solve_level(&defect, start, opts)?);
    }
    let inc: Vec<f64> = levels
        .windows(2)
        .map(|w| (w[1].gamma - w[0].gamma).abs())
        .collect();
    let tail = &inc[inc.len().saturating_sub(3)..];
    let decreasing = tail.len() >= 2 && tail.windows(2).all(|w| w[1] < w[0]);
    let converged = decreasing && inc.last().is_some_and(|&d| d <= opts.increment_tol);
    Ok(GammaSearchReport { levels, converged })
}

/// Parameter for one corner of `mesh`, searched on its element patch.
///
/// The patch around the corner, with exact Dirichlet data, is refined
/// uniformly and searched on levels `2..=finest` (the level-1 patch has no
/// free vertex). The result depends only on the corner angle and the patch
/// shape, so corners with congruent patches share it.
pub fn corner_gamma(
    mesh: &TriMesh,
    corner: usize,
    finest: u32,
    opts: &GammaSearchOptions,
) -> Result<GammaSearchReport> {
    if finest < 4 {
        return Err(Error::InvalidParameter("gamma search needs at least three levels".into()));
    }
    let patch = corner_patch(mesh, corner)?;
    let s1 = SingularFunction::new(1, patch.corners()[0].corner)?;
    let mut meshes = Vec::with_capacity(finest as usize - 1);
    let mut current = uniform_refine(&patch);
    while current.level() < finest {
        let next = uniform_refine(&current);
        meshes.push(current);
        current = next;
    }
    meshes.push(current);
    find_gamma(&meshes, &s1, opts)
}

fn solve_level(defect: &EnergyDefect, start: Option<f64>, opts: &GammaSearchOptions) -> Result<GammaLevel> {
    let level = defect.level();
    let evals = core::cell::Cell::new(0usize);
    let eval = |gamma: f64, warm: Option<&[f64]>| -> Result<DefectValue> {
        evals.set(evals.get() + 1);
        defect.evaluate(gamma, warm)
    };
    let g0 = eval(0.0, None)?;
    let tol = opts.tol_factor * defect.h() * defect.h() * g0.value.abs();
    if !(g0.value > 0.0) {
        return Err(Error::NoSignChange {
            level,
            low: g0.value,
            high: f64::NAN,
        });
    }
    // bracket [lo, hi] with g(lo) > 0 > g(hi); g(hi) unknown until evaluated
    let mut lo = 0.0;
    let mut hi = GAMMA_MAX;
    let mut warm = g0.free.clone();

    let (mut a, mut b) = match start {
        None => {
            let top = eval(GAMMA_MAX * (1.0 - 1e-9), Some(&warm))?;
            if !(top.value < 0.0) {
                return Err(Error::NoSignChange {
                    level,
                    low: g0.value,
                    high: top.value,
                });
            }
            hi = top.gamma;
            warm = top.free.clone();
            (g0, top)
        }
        Some(prev) => {
            let prev = prev.clamp(1e-6, GAMMA_MAX - 2e-3);
            let first = eval(prev, Some(&warm))?;
            let second = eval(prev + 1e-3, Some(&first.free))?;
            warm = second.free.clone();
            (first, second)
        }
    };
    for p in [&a, &b] {
        update_bracket(p, &mut lo, &mut hi);
    }
    loop {
        let best = if a.value.abs() < b.value.abs() { &a } else { &b };
        if best.value.abs() <= tol {
            return Ok(GammaLevel {
                level,
                h: defect.h(),
                gamma: best.gamma,
                defect: best.value,
                iters: evals.get(),
            });
        }
        if evals.get() >= opts.max_evaluations || hi - lo < 1e-15 {
            return Err(Error::RootNotFound {
                level,
                gamma: best.gamma,
                defect: best.value,
            });
        }
        let slope = (b.value - a.value) / (b.gamma - a.gamma);
        let mut next = b.gamma - b.value / slope;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        let c = eval(next, Some(&warm))?;
        update_bracket(&c, &mut lo, &mut hi);
        warm = c.free.clone();
        a = b;
        b = c;
    }
}

fn update_bracket(p: &DefectValue, lo: &mut f64, hi: &mut f64) {
    if p.value > 0.0 {
        *lo = lo.max(p.gamma);
    } else {
        *hi = hi.min(p.gamma);
    }
}
