//! Standard and modified Ritz projections of `s1` on the L-shape.

use std::path::{Path, PathBuf};

use cornerheat_core::correction::{modified_ritz, CorrectionConfig};
use cornerheat_core::fem::{error_norm, CgOptions, DofMap, NormKind, QuadratureRule};
use cornerheat_core::singular::SingularFunction;
use serde::Serialize;

use super::{audit_check, finest_rate, l_shape_hierarchy, resolve_l_shape_gamma, write_json, write_record, StudyReport};
use crate::checks::Check;
use crate::config::StudyConfig;
use crate::error::{AtLevel, Result};
use crate::record::{ConvergenceRecord, LevelRecord};

/// Errors on the part of the domain farther than this from the corner.
pub const OUTSIDE_RADIUS: f64 = 0.25;

#[derive(Debug, Clone, Serialize)]
pub struct EllipticReport {
    pub config: StudyConfig,
    pub gamma: f64,
    pub standard: ConvergenceRecord,
    pub corrected: ConvergenceRecord,
    /// `err_l2` holds the L2 error away from the corner.
    pub corrected_outside: ConvergenceRecord,
}

pub fn run_elliptic_pollution(cfg: &StudyConfig) -> Result<EllipticReport> {
    cfg.validate()?;
    let (gamma, _) = resolve_l_shape_gamma(cfg.gamma)?;
    let meshes = l_shape_hierarchy(cfg.levels)?;
    let s1 = SingularFunction::new(1, meshes[0].corners()[0].corner)?;
    let rule = QuadratureRule::default();
    let weighted = NormKind::WeightedL2 { alpha: cfg.alpha, corner: 0 };
    let outside = NormKind::L2Outside { radius: OUTSIDE_RADIUS, corner: 0 };
    let cg = CgOptions::default().with_tol(1e-12);

    let mut standard = ConvergenceRecord::new("standard");
    let mut corrected = ConvergenceRecord::new("corrected");
    let mut corrected_outside = ConvergenceRecord::new("corrected_outside");
    for mesh in &meshes {
        let level = mesh.level();
        let base = LevelRecord {
            level,
            h: mesh.h(),
            dofs: DofMap::from_mesh(mesh).n_free(),
            ..Default::default()
        };
        let plain = modified_ritz(mesh, &[], &s1, &s1, &cg).at_level(level)?;
        standard.push(LevelRecord {
            err_l2: Some(error_norm(mesh, &plain, &s1, NormKind::L2, &rule).at_level(level)?),
            err_weighted: Some(error_norm(mesh, &plain, &s1, weighted, &rule).at_level(level)?),
            ..base.clone()
        })?;
        let cfgs = [CorrectionConfig::single(0, gamma)?];
        let modified = modified_ritz(mesh, &cfgs, &s1, &s1, &cg).at_level(level)?;
        corrected.push(LevelRecord {
            err_l2: Some(error_norm(mesh, &modified, &s1, NormKind::L2, &rule).at_level(level)?),
            err_weighted: Some(error_norm(mesh, &modified, &s1, weighted, &rule).at_level(level)?),
            ..base.clone()
        })?;
        corrected_outside.push(LevelRecord {
            err_l2: Some(error_norm(mesh, &modified, &s1, outside, &rule).at_level(level)?),
            ..base
        })?;
    }
    Ok(EllipticReport {
        config: cfg.clone(),
        gamma,
        standard,
        corrected,
        corrected_outside,
    })
}

impl StudyReport for EllipticReport {
    fn checks(&self) -> Vec<Check> {
        let std_w = finest_rate(&self.standard, |r| r.rate_weighted);
        let mut checks = vec![
            Check::new(
                "standard weighted rate polluted",
                std_w.is_some_and(|r| r <= 1.5),
                format!("{std_w:?} <= 1.5"),
            ),
            Check::band("corrected weighted rate", finest_rate(&self.corrected, |r| r.rate_weighted), 1.9, 2.1),
            Check::band("corrected L2 rate away from the corner", finest_rate(&self.corrected_outside, |r| r.rate_l2), 1.85, 2.15),
        ];
        checks.push(audit_check(&[&self.standard, &self.corrected, &self.corrected_outside]));
        checks
    }

    fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        Ok(vec![
            write_record(dir, "elliptic_standard.csv", &self.standard)?,
            write_record(dir, "elliptic_corrected.csv", &self.corrected)?,
            write_record(dir, "elliptic_corrected_outside.csv", &self.corrected_outside)?,
            write_json(dir, "elliptic_pollution.json", self)?,
        ])
    }
}
