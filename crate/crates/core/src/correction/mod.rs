//! Local stiffness correction around re-entrant corners.
//!
//! The corrected form is `a_h(w, v) = a(w, v) - sum_i gamma_i int_{omega_i} grad w . grad v`
//! where `omega_1` is the patch of triangles touching the corner and
//! `omega_i` the following rings.

mod energy;
mod extraction;
mod search;

pub use energy::{singular_energy, DefectValue, EnergyDefect};
pub use extraction::{
    extract_k1_elliptic, extract_k1_parabolic, post_process, post_process_with, PostProcessed,
};
pub use search::{corner_gamma, find_gamma, GAMMA_MAX, GammaLevel, GammaSearchOptions, GammaSearchReport};

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, assemble_energy_load, assemble_stiffness, assemble_stiffness_on, solve_spd,
    CgOptions, FieldVector, ScalarField, SparseMatrix,
};
use crate::mesh::{corner_layers, TriMesh};

/// Correction parameters for one corner.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorrectionConfig {
    /// Index into [`TriMesh::corners`].
    pub corner: usize,
    /// `gamma_1, ..., gamma_K`, innermost layer first.
    pub gammas: Vec<f64>,
}

impl CorrectionConfig {
    /// One-patch correction with parameter `gamma` in `[0, 1/2)`.
    pub fn single(corner: usize, gamma: f64) -> Result<Self> {
        Self::layered(corner, alloc::vec![gamma])
    }

    /// Layered correction. Each parameter must lie in `[0, 1/2)`.
    pub fn layered(corner: usize, gammas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::InvalidParameter("correction needs at least one layer".into()));
        }
        for &g in &gammas {
            if !(0.0..0.5).contains(&g) {
                return Err(Error::InvalidParameter(format!(
                    "correction parameter {g} not in [0, 1/2)"
                )));
            }
        }
        Ok(CorrectionConfig { corner, gammas })
    }

    pub fn k(&self) -> usize {
        self.gammas.len()
    }
}

/// Correction matrix `C = sum_i gamma_i S|_{omega_i}` for one corner.
pub fn build_correction(mesh: &TriMesh, cfg: &CorrectionConfig) -> Result<SparseMatrix> {
    let layers = corner_layers(mesh, cfg.corner, cfg.k())?;
    let mut c = SparseMatrix::zeros(mesh.n_vertices(), mesh.n_vertices());
    for (layer, &gamma) in layers.layers.iter().zip(&cfg.gammas) {
        if gamma != 0.0 {
            let part = assemble_stiffness_on(mesh, layer.iter().copied())?;
            c = c.add_scaled(&part, gamma)?;
        }
    }
    Ok(c)
}

/// Sum of the correction matrices of several corners.
pub fn build_corrections(mesh: &TriMesh, cfgs: &[CorrectionConfig]) -> Result<SparseMatrix> {
    let mut c = SparseMatrix::zeros(mesh.n_vertices(), mesh.n_vertices());
    for cfg in cfgs {
        c = c.add_scaled(&build_correction(mesh, cfg)?, 1.0)?;
    }
    Ok(c)
}

/// Corrected stiffness `S - C`.
pub fn modified_stiffness(mesh: &TriMesh, cfgs: &[CorrectionConfig]) -> Result<SparseMatrix> {
    assemble_stiffness(mesh)?.add_scaled(&build_corrections(mesh, cfgs)?, -1.0)
}

/// Modified Ritz projection: `(S - C) w_h = r` with `r_i = a(u, phi_i)` and
/// `w_h = g` on Dirichlet vertices. An empty `cfgs` gives the standard Ritz
/// projection.
pub fn modified_ritz(
    mesh: &TriMesh,
    cfgs: &[CorrectionConfig],
    u: &impl ScalarField,
    g: &impl ScalarField,
    opts: &CgOptions,
) -> Result<FieldVector> {
    let a = modified_stiffness(mesh, cfgs)?;
    let r = assemble_energy_load(mesh, u)?;
    let sys = apply_dirichlet(&a, &r, g, mesh)?;
    let sol = solve_spd(&sys.matrix, &sys.rhs, opts)?;
    Ok(sys.expand(&sol.x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{element_stiffness, error_norm, interpolate, DofMap, NormKind, QuadratureRule};
    use crate::mesh::{build_l_shape, build_notched_rectangle, uniform_refine, Point2};
    use crate::singular::SingularFunction;
    use alloc::collections::BTreeSet;
    use alloc::vec;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    #[test]
    fn zero_gamma_gives_zero_matrix() {
        let mesh = build_l_shape();
        let c = build_correction(&mesh, &CorrectionConfig::single(0, 0.0).unwrap()).unwrap();
        assert!(c.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_layer_is_scaled_patch_stiffness() {
        let mesh = build_l_shape();
        let gamma = 0.17;
        let c = build_correction(&mesh, &CorrectionConfig::single(0, gamma).unwrap()).unwrap();
        let apex = mesh.corners()[0].vertex_index;
        let mut dense = vec![vec![0.0; mesh.n_vertices()]; mesh.n_vertices()];
        let mut count = 0;
        for (t, tri) in mesh.triangles().iter().enumerate() {
            if tri.contains(&apex) {
                count += 1;
                let k = element_stiffness(mesh.triangle_points(t)).unwrap();
                for a in 0..3 {
                    for b in 0..3 {
                        dense[tri[a]][tri[b]] += gamma * k[a][b];
                    }
                }
            }
        }
        assert_eq!(count, 6);
        for i in 0..mesh.n_vertices() {
            for j in 0..mesh.n_vertices() {
                assert!((c.get(i, j) - dense[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CorrectionConfig::single(0, 0.5).is_err());
        assert!(CorrectionConfig::single(0, -0.1).is_err());
        assert!(CorrectionConfig::layered(0, vec![]).is_err());
        let mesh = build_l_shape();
        assert!(build_correction(&mesh, &CorrectionConfig::single(3, 0.1).unwrap()).is_err());
    }

    #[test]
    fn corrected_stiffness_is_spd_on_free_dofs() {
        let mesh = build_l_shape();
        let a = modified_stiffness(&mesh, &[CorrectionConfig::single(0, 0.3).unwrap()]).unwrap();
        let dofs = DofMap::from_mesh(&mesh);
        let aff = a.submatrix(dofs.free(), dofs.free());
        let n = aff.n_rows();
        let dense = DMatrix::from_fn(n, n, |i, j| aff.get(i, j));
        let min = dense.symmetric_eigen().eigenvalues.min();
        assert!(min > 0.0, "{min}");
        let b = vec![1.0; n];
        assert!(solve_spd(&aff, &b, &CgOptions::default()).is_ok());
    }

    #[test]
    fn linear_functions_are_reproduced() {
        let mesh = uniform_refine(&build_l_shape());
        let u = |x: Point2| x.x + x.y;
        let cfg = [CorrectionConfig::single(0, 0.0).unwrap()];
        let w = modified_ritz(&mesh, &cfg, &u, &u, &CgOptions::default().with_tol(1e-14)).unwrap();
        for (a, b) in w.iter().zip(interpolate(&mesh, &u)) {
            assert!((a - b).abs() < 1e-12);
        }
        // with gamma > 0 the residual of the interpolant is exactly the correction
        let cfg = [CorrectionConfig::single(0, 0.2).unwrap()];
        let a = modified_stiffness(&mesh, &cfg).unwrap();
        let r = assemble_energy_load(&mesh, &u).unwrap();
        let c = build_corrections(&mesh, &cfg).unwrap();
        let iu = interpolate(&mesh, &u);
        let res = a.mul_vec(&iu);
        let ciu = c.mul_vec(&iu);
        for i in 0..mesh.n_vertices() {
            assert!((r[i] - ciu[i] - res[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_gamma_is_continuous() {
        let mesh = uniform_refine(&build_l_shape());
        let corner = mesh.corners()[0].corner;
        let s1 = SingularFunction::new(1, corner).unwrap();
        let opts = CgOptions::default().with_tol(1e-13);
        let w0 = modified_ritz(&mesh, &[], &s1, &s1, &opts).unwrap();
        let w1 = modified_ritz(&mesh, &[CorrectionConfig::single(0, 1e-8).unwrap()], &s1, &s1, &opts).unwrap();
        let rule = QuadratureRule::default();
        let e0 = error_norm(&mesh, &w0, &s1, NormKind::L2, &rule).unwrap();
        let e1 = error_norm(&mesh, &w1, &s1, NormKind::L2, &rule).unwrap();
        assert!((e0 - e1).abs() <= 1e-6 * e0);
    }

    #[test]
    fn notched_corners_are_corrected_independently() {
        let mesh = build_notched_rectangle();
        let cfgs: Vec<_> = (0..3).map(|c| CorrectionConfig::single(c, 0.2).unwrap()).collect();
        let all = build_corrections(&mesh, &cfgs).unwrap();
        let mut sum = SparseMatrix::zeros(mesh.n_vertices(), mesh.n_vertices());
        for cfg in &cfgs {
            sum = sum.add_scaled(&build_correction(&mesh, cfg).unwrap(), 1.0).unwrap();
        }
        for (i, j, v) in all.triplets() {
            assert!((v - sum.get(i, j)).abs() < 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn symmetric_and_local(g1 in 0.0f64..0.5, g2 in 0.0f64..0.5, k in 1usize..=2) {
            let mesh = uniform_refine(&build_l_shape());
            let cfg = CorrectionConfig::layered(0, vec![g1, g2][..k].to_vec()).unwrap();
            let a = modified_stiffness(&mesh, core::slice::from_ref(&cfg)).unwrap();
            prop_assert!(a.asymmetry() <= 1e-14);
            let c = build_correction(&mesh, &cfg).unwrap();
            let patch: BTreeSet<usize> = corner_layers(&mesh, 0, k).unwrap().vertices(&mesh);
            for (i, j, v) in c.triplets() {
                if v != 0.0 {
                    prop_assert!(patch.contains(&i) && patch.contains(&j));
                }
            }
        }
    }
}
