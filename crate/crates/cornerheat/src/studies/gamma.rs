//! Correction-parameter search on the L-shape.

use std::path::{Path, PathBuf};

use cornerheat_core::correction::{GammaSearchReport, GAMMA_MAX};
use serde::Serialize;

use super::{l_shape_gamma_search, write_json, StudyReport};
use crate::checks::Check;
use crate::config::StudyConfig;
use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct GammaReport {
    pub config: StudyConfig,
    pub gamma: f64,
    pub increments: Vec<f64>,
    pub search: GammaSearchReport,
}

/// Searches on `cfg.levels` levels, i.e. levels `2..=levels + 1` of the
/// L-shape hierarchy.
pub fn run_gamma(cfg: &StudyConfig) -> Result<GammaReport> {
    cfg.validate()?;
    let search = l_shape_gamma_search(cfg.levels + 1)?;
    Ok(GammaReport {
        config: cfg.clone(),
        gamma: search.gamma(),
        increments: search.increments(),
        search,
    })
}

impl StudyReport for GammaReport {
    fn checks(&self) -> Vec<Check> {
        let tail = &self.increments[self.increments.len().saturating_sub(3)..];
        vec![
            Check::new("search converged", self.search.converged, format!("gamma = {:.6}", self.gamma)),
            Check::new(
                "gamma in (0, 1/2)",
                self.gamma > 0.0 && self.gamma < GAMMA_MAX,
                format!("{:.6}", self.gamma),
            ),
            Check::new(
                "increments decrease over the last three levels",
                tail.len() == 3 && tail.windows(2).all(|w| w[1] < w[0]),
                tail.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(", "),
            ),
        ]
    }

    fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        Ok(vec![write_json(dir, "gamma.json", self)?])
    }
}
