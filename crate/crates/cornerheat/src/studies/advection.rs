//! Advection-diffusion on the notched rectangle: peak value of the
//! solution at the final time for the standard and corrected schemes.

use std::fs;
use std::path::{Path, PathBuf};

use cornerheat_core::correction::{corner_gamma, CorrectionConfig, GammaSearchOptions};
use cornerheat_core::fem::{peak_value, DofMap, Peak};
use cornerheat_core::mesh::{build_notched_rectangle, uniform_refine};
use cornerheat_core::parabolic::{run, Forcing, ParabolicProblem, SchemeConfig, SeparableTerm, TimeGrid};
use cornerheat_core::singular::{ADVECTION_B, ADVECTION_SOURCE};
use cornerheat_core::{Point2, TriMesh};
use serde::Serialize;

use super::{write_json, Clock, StudyReport, SEARCH_FINEST};
use crate::checks::Check;
use crate::config::{GammaChoice, StudyConfig};
use crate::eoc::{column_rates, fitted_rate, richardson, Extrapolation};
use crate::error::{AtLevel, HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdvectionSource {
    /// `sin(pi t) / |x - (2, 3/2)|^2`.
    Singular,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerGamma {
    pub corner: usize,
    pub theta: f64,
    pub gamma: f64,
    /// `None` for a given value.
    pub converged: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QoiRow {
    pub level: u32,
    pub h: f64,
    pub dofs: usize,
    pub dt: f64,
    pub standard: PeakValues,
    pub corrected: PeakValues,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakValues {
    pub nodal: f64,
    pub recovered: f64,
}

impl From<Peak> for PeakValues {
    fn from(p: Peak) -> Self {
        PeakValues {
            nodal: p.nodal,
            recovered: p.recovered,
        }
    }
}

/// Errors against the limit extrapolated from the corrected sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QoiAnalysis {
    pub extrapolation: Extrapolation,
    pub err_standard: Vec<Option<f64>>,
    pub rate_standard: Vec<Option<f64>>,
    pub err_corrected: Vec<Option<f64>>,
    pub rate_corrected: Vec<Option<f64>>,
    /// Least-squares rates over all levels.
    pub fitted_standard: Option<f64>,
    pub fitted_corrected: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdvectionReport {
    pub config: StudyConfig,
    pub source: AdvectionSource,
    pub gammas: Vec<CornerGamma>,
    pub rows: Vec<QoiRow>,
    /// Analysis of the recovered peak values.
    pub recovered: std::result::Result<QoiAnalysis, String>,
    /// Analysis of the nodal maxima.
    pub nodal: std::result::Result<QoiAnalysis, String>,
}

fn corner_gammas(mesh: &TriMesh, choice: GammaChoice) -> Result<Vec<CornerGamma>> {
    (0..mesh.corners().len())
        .map(|i| {
            let theta = mesh.corners()[i].corner.theta;
            Ok(match choice {
                GammaChoice::Value(gamma) => CornerGamma {
                    corner: i,
                    theta,
                    gamma,
                    converged: None,
                },
                GammaChoice::Auto => {
                    let rep = corner_gamma(mesh, i, SEARCH_FINEST, &GammaSearchOptions::default())?;
                    CornerGamma {
                        corner: i,
                        theta,
                        gamma: rep.gamma(),
                        converged: Some(rep.converged),
                    }
                }
            })
        })
        .collect()
}

fn analyse(rows: &[QoiRow], pick: impl Fn(&PeakValues) -> f64) -> std::result::Result<QoiAnalysis, String> {
    if rows.len() < 3 {
        return Err("extrapolation needs three levels".into());
    }
    let n = rows.len();
    let q = [&rows[n - 3], &rows[n - 2], &rows[n - 1]].map(|r| pick(&r.corrected));
    let extrapolation = richardson(q).map_err(|e| e.to_string())?;
    let errors = |f: &dyn Fn(&QoiRow) -> f64| -> Vec<Option<f64>> {
        rows.iter()
            .map(|r| Some((extrapolation.limit - f(r)).abs()).filter(|e| *e > 0.0))
            .collect()
    };
    let err_standard = errors(&|r| pick(&r.standard));
    let err_corrected = errors(&|r| pick(&r.corrected));
    let fit = |e: &[Option<f64>]| e.iter().copied().collect::<Option<Vec<f64>>>().and_then(|e| fitted_rate(&e).ok());
    Ok(QoiAnalysis {
        extrapolation,
        fitted_standard: fit(&err_standard),
        fitted_corrected: fit(&err_corrected),
        rate_standard: column_rates(&err_standard).map_err(|e| e.to_string())?,
        rate_corrected: column_rates(&err_corrected).map_err(|e| e.to_string())?,
        err_standard,
        err_corrected,
    })
}

/// Runs levels `0..cfg.levels` of the notched rectangle with
/// `dt = dt0 / 4^level`.
pub fn run_advection_qoi(cfg: &StudyConfig, source: AdvectionSource) -> Result<AdvectionReport> {
    cfg.validate()?;
    let mut mesh = build_notched_rectangle();
    let gammas = corner_gammas(&mesh, cfg.gamma)?;
    let correction = gammas
        .iter()
        .map(|g| CorrectionConfig::single(g.corner, g.gamma))
        .collect::<cornerheat_core::Result<Vec<_>>>()?;
    let forcing = || match source {
        AdvectionSource::Singular => Forcing::Separable(vec![SeparableTerm::new(
            |t| (std::f64::consts::PI * t).sin(),
            |x: Point2| {
                let d = x - ADVECTION_SOURCE;
                1.0 / d.dot(d)
            },
        )]),
        AdvectionSource::Zero => Forcing::Zero,
    };
    let mut rows = Vec::with_capacity(cfg.levels as usize);
    for level in 0..cfg.levels {
        if level > 0 {
            mesh = uniform_refine(&mesh);
        }
        let grid = TimeGrid::with_max_dt(cfg.t_end, cfg.dt0 / 4f64.powi(level as i32))?;
        let mut peaks = Vec::with_capacity(2);
        let mut wall_seconds = 0.0;
        for cfgs in [Vec::new(), correction.clone()] {
            let problem = ParabolicProblem::new(&mesh)
                .with_correction(cfgs)
                .with_advection(ADVECTION_B)
                .with_source(forcing());
            let mut clock = Clock::new();
            let out = run(&problem, &SchemeConfig::default(), &grid, &mut [&mut clock]).at_level(level)?;
            wall_seconds += clock.seconds().unwrap_or(0.0);
            peaks.push(PeakValues::from(peak_value(&mesh, &out.state).at_level(level)?));
        }
        rows.push(QoiRow {
            level,
            h: mesh.h(),
            dofs: DofMap::from_mesh(&mesh).n_free(),
            dt: grid.dt(),
            standard: peaks[0],
            corrected: peaks[1],
            wall_seconds,
        });
    }
    Ok(AdvectionReport {
        config: cfg.clone(),
        source,
        gammas,
        recovered: analyse(&rows, |p| p.recovered),
        nodal: analyse(&rows, |p| p.nodal),
        rows,
    })
}

/// Number of finest levels whose rates are compared.
pub const COMPARED_LEVELS: usize = 4;

impl AdvectionReport {
    /// Per-pair rates over the finest [`COMPARED_LEVELS`] levels as
    /// `(standard, corrected)`.
    pub fn compared_rates(&self, a: &QoiAnalysis) -> Vec<(Option<f64>, Option<f64>)> {
        let n = self.rows.len();
        let first = n.saturating_sub(COMPARED_LEVELS - 1).max(1);
        (first..n).map(|i| (a.rate_standard[i], a.rate_corrected[i])).collect()
    }

    fn csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "level", "h", "dofs", "dt", "qoi_standard", "qoi_corrected", "err_standard", "rate_standard",
            "err_corrected", "rate_corrected", "qoi_nodal_standard", "qoi_nodal_corrected", "err_nodal_standard",
            "rate_nodal_standard", "err_nodal_corrected", "rate_nodal_corrected", "wall_seconds",
        ])?;
        let cell = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        let col = |a: &std::result::Result<QoiAnalysis, String>, i: usize| -> [String; 4] {
            match a {
                Ok(a) => [
                    cell(a.err_standard[i]),
                    cell(a.rate_standard[i]),
                    cell(a.err_corrected[i]),
                    cell(a.rate_corrected[i]),
                ],
                Err(_) => Default::default(),
            }
        };
        for (i, r) in self.rows.iter().enumerate() {
            let [es, rs, ec, rc] = col(&self.recovered, i);
            let [ens, rns, enc, rnc] = col(&self.nodal, i);
            w.write_record([
                r.level.to_string(),
                r.h.to_string(),
                r.dofs.to_string(),
                r.dt.to_string(),
                r.standard.recovered.to_string(),
                r.corrected.recovered.to_string(),
                es,
                rs,
                ec,
                rc,
                r.standard.nodal.to_string(),
                r.corrected.nodal.to_string(),
                ens,
                rns,
                enc,
                rnc,
                r.wall_seconds.to_string(),
            ])?;
        }
        w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
    }
}

impl StudyReport for AdvectionReport {
    fn checks(&self) -> Vec<Check> {
        if self.source == AdvectionSource::Zero {
            let zero = self.rows.iter().all(|r| r.standard.nodal == 0.0 && r.corrected.nodal == 0.0);
            return vec![Check::new("zero source gives zero QoI", zero, format!("{} levels", self.rows.len()))];
        }
        let a = match &self.recovered {
            Ok(a) => a,
            Err(e) => return vec![Check::new("QoI extrapolation", false, e.clone())],
        };
        let pairs = self.compared_rates(a);
        let enough = self.rows.len() >= COMPARED_LEVELS;
        let better = enough && pairs.iter().all(|(s, c)| matches!((s, c), (Some(s), Some(c)) if c > s));
        vec![
            Check::new(
                format!("corrected QoI rate above standard over the finest {COMPARED_LEVELS} levels"),
                better,
                format!("(standard, corrected) = {pairs:.3?}"),
            ),
            Check::band("least-squares corrected QoI rate, all levels", a.fitted_corrected, 1.5, 2.2),
            Check::new(
                "least-squares standard QoI rate, all levels",
                true,
                format!("{:.4?}, finest-pair orders (standard, corrected) = ({:.4?}, {:.4})", a.fitted_standard, a.rate_standard.last().copied().flatten(), a.extrapolation.order),
            ),
        ]
    }

    fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join("advection_qoi.csv");
        fs::write(&csv_path, self.csv()?)?;
        Ok(vec![csv_path, write_json(dir, "advection_qoi.json", self)?])
    }
}
