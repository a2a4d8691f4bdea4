//! Heat equation on the L-shape with a known three-mode solution: standard
//! and corrected explicit Euler, stress-intensity factor and post-processing.

use std::path::{Path, PathBuf};

use cornerheat_core::correction::{extract_k1_parabolic, post_process, CorrectionConfig};
use cornerheat_core::fem::{error_norm, NormKind, QuadratureRule};
use cornerheat_core::parabolic::{run, Forcing, ParabolicProblem, SchemeConfig, SeparableTerm, TimeGrid};
use cornerheat_core::singular::Table1Solution;
use cornerheat_core::{Point2, TriMesh};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{audit_check, dual_function, Clock, l_shape_hierarchy, resolve_l_shape_gamma, write_json, write_record, SeriesObserver, StudyReport};
use crate::checks::Check;
use crate::config::StudyConfig;
use crate::eoc::fitted_rate;
use crate::error::{AtLevel, Result};
use crate::record::{ConvergenceRecord, LevelRecord};

/// Number of rows in the time series of the finest corrected run.
const SERIES_ROWS: usize = 100;

/// Vertices sampled for the nodal spot check.
const SPOT_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct K1Row {
    pub level: u32,
    pub k1h: f64,
    /// `|sin(T) - k1h|`.
    pub error: f64,
}

/// Largest nodal error of the finest corrected run at randomly chosen
/// vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpotCheck {
    pub seed: u64,
    pub vertices: Vec<usize>,
    pub max_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Report {
    pub config: StudyConfig,
    pub gamma: f64,
    pub standard: ConvergenceRecord,
    pub corrected: ConvergenceRecord,
    pub k1: Vec<K1Row>,
    /// Least-squares rate of the k1 errors over levels 3 and up.
    pub k1_rate: Option<f64>,
    pub spot_check: SpotCheck,
    #[serde(skip)]
    pub series_csv: Option<Vec<u8>>,
}

/// The three-mode problem on `mesh` with exact source and boundary data.
pub fn table1_problem(mesh: &TriMesh, sol: Table1Solution, correction: Vec<CorrectionConfig>) -> ParabolicProblem<'_> {
    let terms = |derivative: bool| {
        Forcing::Separable(
            (0..3)
                .map(|i| {
                    let mode = sol.modes[i];
                    SeparableTerm::new(
                        move |t| {
                            if derivative {
                                Table1Solution::time_derivatives(t)[i]
                            } else {
                                Table1Solution::coefficients(t)[i]
                            }
                        },
                        move |x| mode.eval(x).unwrap_or(f64::NAN),
                    )
                })
                .collect(),
        )
    };
    ParabolicProblem::new(mesh)
        .with_correction(correction)
        .with_source(terms(true))
        .with_boundary(terms(false))
        .with_initial(move |x| sol.u(0.0, x).unwrap_or(f64::NAN))
}

pub fn run_table1(cfg: &StudyConfig) -> Result<Table1Report> {
    cfg.validate()?;
    let (gamma, _) = resolve_l_shape_gamma(cfg.gamma)?;
    let meshes = l_shape_hierarchy(cfg.levels)?;
    let corner = meshes[0].corners()[0].corner;
    let sol = Table1Solution::new(corner)?;
    let dual = dual_function(corner)?;
    let rule = QuadratureRule::default();
    let weighted = NormKind::WeightedL2 { alpha: cfg.alpha, corner: 0 };
    let t_end = cfg.t_end;
    let exact = move |x: Point2| sol.u(t_end, x).unwrap_or(f64::NAN);
    let source = move |x: Point2| sol.f(t_end, x).unwrap_or(f64::NAN);

    let mut standard = ConvergenceRecord::new("standard");
    let mut corrected = ConvergenceRecord::new("corrected");
    let mut k1 = Vec::new();
    let mut series_csv = None;
    let mut spot_check = None;
    for mesh in &meshes {
        let level = mesh.level();
        let finest = level == cfg.levels;
        let dt = cfg.dt0 / 4f64.powi(level as i32 - 1);
        let grid = TimeGrid::with_max_dt(t_end, dt)?;
        let dofs = cornerheat_core::fem::DofMap::from_mesh(mesh).n_free();
        for correct in [false, true] {
            let cfgs = if correct { vec![CorrectionConfig::single(0, gamma)?] } else { Vec::new() };
            let problem = table1_problem(mesh, sol, cfgs.clone());
            let mut clock = Clock::new();
            let mut series = SeriesObserver::new(
                mesh,
                move |t: f64, x: Point2| sol.u(t, x).unwrap_or(f64::NAN),
                cfg.alpha,
                0,
                grid.n_steps().div_ceil(SERIES_ROWS),
            );
            let out = if correct && finest && cfg.series {
                run(&problem, &SchemeConfig::default(), &grid, &mut [&mut clock, &mut series])
            } else {
                run(&problem, &SchemeConfig::default(), &grid, &mut [&mut clock])
            }
            .at_level(level)?;
            let wall_seconds = clock.seconds();
            let mut row = LevelRecord {
                level,
                h: mesh.h(),
                dofs,
                dt: Some(grid.dt()),
                err_l2: Some(error_norm(mesh, &out.state, &exact, NormKind::L2, &rule).at_level(level)?),
                err_weighted: Some(error_norm(mesh, &out.state, &exact, weighted, &rule).at_level(level)?),
                wall_seconds,
                ..Default::default()
            };
            if correct {
                let k1h = extract_k1_parabolic(mesh, &out.state, &out.previous, out.dt, &source, &dual).at_level(level)?;
                let post = post_process(mesh, &cfgs, sol.modes[0], &out.state, k1h).at_level(level)?;
                row.err_post = Some(post.error_norm(mesh, &exact, NormKind::L2, &rule).at_level(level)?);
                row.k1h = Some(k1h);
                k1.push(K1Row {
                    level,
                    k1h,
                    error: (Table1Solution::k1(t_end) - k1h).abs(),
                });
                if finest {
                    if cfg.series {
                        let mut buf = Vec::new();
                        series.write_csv(&mut buf)?;
                        series_csv = Some(buf);
                    }
                    spot_check = Some(spot(mesh, &out.state, &exact, cfg.seed));
                }
                corrected.push(row)?;
            } else {
                standard.push(row)?;
            }
        }
    }
    let fit: Vec<f64> = k1.iter().filter(|r| r.level >= 3).map(|r| r.error).collect();
    let k1_rate = if fit.len() >= 2 { fitted_rate(&fit).ok() } else { None };
    Ok(Table1Report {
        config: cfg.clone(),
        gamma,
        standard,
        corrected,
        k1,
        k1_rate,
        spot_check: spot_check.expect("the finest level always runs"),
        series_csv,
    })
}

fn spot(mesh: &TriMesh, state: &[f64], exact: &impl Fn(Point2) -> f64, seed: u64) -> SpotCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mesh.n_vertices();
    let mut vertices = sample(&mut rng, n, SPOT_SAMPLES.min(n)).into_vec();
    vertices.sort_unstable();
    let max_error = vertices
        .iter()
        .map(|&v| (exact(mesh.vertices()[v]) - state[v]).abs())
        .fold(0.0, f64::max);
    SpotCheck { seed, vertices, max_error }
}

impl StudyReport for Table1Report {
    fn checks(&self) -> Vec<Check> {
        let mut checks = Vec::new();
        if self.config.levels >= 5 {
            for (name, record, column, lo, hi) in [
                ("standard L2 rate", &self.standard, 0, 1.2, 1.55),
                ("corrected weighted rate", &self.corrected, 1, 1.85, 2.25),
                ("post-processed L2 rate", &self.corrected, 2, 1.9, 2.3),
            ] {
                let rates = record.last_rates(2, |r| [r.rate_l2, r.rate_weighted, r.rate_post][column]);
                for (rate, row) in rates.iter().zip(&record.rows[record.rows.len() - 2..]) {
                    checks.push(Check::band(format!("{name}, level {}", row.level), *rate, lo, hi));
                }
            }
        }
        if self.config.levels >= 6 {
            checks.push(Check::band("k1 error rate, levels 3 and up", self.k1_rate, 1.8, 2.2));
        }
        checks.push(audit_check(&[&self.standard, &self.corrected]));
        checks
    }

    fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut paths = vec![
            write_record(dir, "table1_standard.csv", &self.standard)?,
            write_record(dir, "table1_corrected.csv", &self.corrected)?,
            write_json(dir, "table1.json", self)?,
        ];
        if let Some(csv) = &self.series_csv {
            let path = dir.join("table1_series.csv");
            std::fs::write(&path, csv)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{GammaChoice, StudyKind};

    #[test]
    fn small_run_is_consistent_and_deterministic() {
        let mut cfg = StudyConfig::new(StudyKind::Table1).with_levels(3).with_gamma(GammaChoice::Value(0.13609));
        cfg.series = true;
        let a = run_table1(&cfg).unwrap();
        assert_eq!(a.standard.rows.len(), 3);
        assert_eq!(a.k1.len(), 3);
        assert!(a.standard.rows[0].rate_l2.is_none());
        assert!(a.standard.rows.iter().all(|r| r.err_post.is_none() && r.k1h.is_none()));
        assert!(a.corrected.rows.iter().all(|r| r.err_post.is_some()));
        a.standard.audit().unwrap();
        a.corrected.audit().unwrap();
        let series = String::from_utf8(a.series_csv.clone().unwrap()).unwrap();
        assert!(series.lines().count() > 10);
        let b = run_table1(&cfg).unwrap();
        let strip = |r: &ConvergenceRecord| {
            let mut r = r.clone();
            r.rows.iter_mut().for_each(|row| row.wall_seconds = None);
            r
        };
        assert_eq!(strip(&a.corrected), strip(&b.corrected));
        assert_eq!(a.spot_check, b.spot_check);
    }
}
