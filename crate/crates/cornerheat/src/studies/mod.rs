//! The convergence studies run by the command-line harness.

mod advection;
mod cfl;
mod elliptic;
mod gamma;
mod series;
mod table1;

pub use advection::{run_advection_qoi, AdvectionReport, AdvectionSource, QoiRow};
pub use cfl::{run_cfl_probe, CflLevel, CflReport};
pub use elliptic::{run_elliptic_pollution, EllipticReport};
pub use gamma::{run_gamma, GammaReport};
pub use series::SeriesObserver;
pub use table1::{run_table1, table1_problem, K1Row, SpotCheck, Table1Report};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cornerheat_core::correction::{find_gamma, GammaSearchOptions, GammaSearchReport};
use cornerheat_core::mesh::{l_shape, uniform_refine};
use cornerheat_core::parabolic::Observer;
use cornerheat_core::singular::{CutoffEta, SingularFunction};
use cornerheat_core::{ReentrantCorner, TriMesh};
use serde::Serialize;

use crate::checks::Check;
use crate::config::{GammaChoice, StudyConfig, StudyKind};
use crate::error::Result;
use crate::record::ConvergenceRecord;

/// Finest level of the correction-parameter searches run for `gamma = auto`.
pub const SEARCH_FINEST: u32 = 8;

/// Inner and outer radius of the cutoff of the dual singular function.
pub const DUAL_CUTOFF: (f64, f64) = (0.25, 0.75);

/// Output of a study.
pub trait StudyReport {
    /// Acceptance bands of the study.
    fn checks(&self) -> Vec<Check>;

    /// Writes the report files into `dir` and returns their paths.
    fn write(&self, dir: &Path) -> Result<Vec<PathBuf>>;
}

/// Runs the study selected by `cfg`.
pub fn run_study(cfg: &StudyConfig) -> Result<Box<dyn StudyReport>> {
    cfg.validate()?;
    Ok(match cfg.study {
        StudyKind::Table1 => Box::new(run_table1(cfg)?),
        StudyKind::Gamma => Box::new(run_gamma(cfg)?),
        StudyKind::AdvectionQoi => Box::new(run_advection_qoi(cfg, AdvectionSource::Singular)?),
        StudyKind::CflProbe => Box::new(run_cfl_probe(cfg)?),
        StudyKind::EllipticPollution => Box::new(run_elliptic_pollution(cfg)?),
    })
}

/// L-shape meshes for levels `1..=levels`; level 1 is the six corner
/// triangles and each further level one uniform refinement.
pub fn l_shape_hierarchy(levels: u32) -> Result<Vec<TriMesh>> {
    let mut meshes = vec![l_shape(1)?.with_level(1)];
    while (meshes.len() as u32) < levels {
        let next = uniform_refine(meshes.last().expect("non-empty"));
        meshes.push(next);
    }
    Ok(meshes)
}

/// Searches the L-shape parameter on levels `2..=finest` of
/// [`l_shape_hierarchy`].
pub fn l_shape_gamma_search(finest: u32) -> Result<GammaSearchReport> {
    let meshes = l_shape_hierarchy(finest)?;
    let s1 = SingularFunction::new(1, meshes[0].corners()[0].corner)?;
    Ok(find_gamma(&meshes[1..], &s1, &GammaSearchOptions::default())?)
}

/// `gamma` for the L-shape and, when searched, the search report.
pub fn resolve_l_shape_gamma(choice: GammaChoice) -> Result<(f64, Option<GammaSearchReport>)> {
    match choice {
        GammaChoice::Value(g) => Ok((g, None)),
        GammaChoice::Auto => {
            let report = l_shape_gamma_search(SEARCH_FINEST)?;
            Ok((report.gamma(), Some(report)))
        }
    }
}

pub fn dual_function(corner: ReentrantCorner) -> Result<SingularFunction> {
    let eta = CutoffEta::new(DUAL_CUTOFF.0, DUAL_CUTOFF.1)?;
    Ok(SingularFunction::dual(1, corner, eta)?)
}

pub(crate) fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut file = fs::File::create(&path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(path)
}

pub(crate) fn write_record(dir: &Path, name: &str, record: &ConvergenceRecord) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    record.write_csv(fs::File::create(&path)?)?;
    Ok(path)
}

/// Time of the first observation, i.e. after assembly and the initial
/// state; the elapsed time then covers the time loop only.
pub(crate) struct Clock(Option<Instant>);

impl Clock {
    pub(crate) fn new() -> Self {
        Clock(None)
    }

    pub(crate) fn seconds(&self) -> Option<f64> {
        self.0.map(|t| t.elapsed().as_secs_f64())
    }
}

impl Observer for Clock {
    fn observe(&mut self, step: usize, _: f64, _: &[f64]) -> cornerheat_core::Result<()> {
        if step == 0 {
            self.0 = Some(Instant::now());
        }
        Ok(())
    }
}

/// Every stored rate agrees with its error column.
pub(crate) fn audit_check(records: &[&ConvergenceRecord]) -> Check {
    let failures: Vec<String> = records.iter().filter_map(|r| r.audit().err()).map(|e| e.to_string()).collect();
    let detail = if failures.is_empty() { format!("{} tables consistent", records.len()) } else { failures.join("; ") };
    Check::new("rate audit", failures.is_empty(), detail)
}

/// Rate of the finest pair of a column.
pub(crate) fn finest_rate(record: &ConvergenceRecord, f: impl Fn(&crate::record::LevelRecord) -> Option<f64>) -> Option<f64> {
    record.rows.last().and_then(f)
}
