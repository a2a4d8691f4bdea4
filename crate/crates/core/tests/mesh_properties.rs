use std::collections::BTreeSet;

use cornerheat_core::mesh::{build_notched_rectangle, corner_layers, corner_patch, graded_refine, l_shape, uniform_refine};
use cornerheat_core::{Point2, TriMesh};
use proptest::prelude::*;

fn refined(mesh: &TriMesh, times: usize) -> TriMesh {
    (0..times).fold(mesh.clone(), |m, _| uniform_refine(&m))
}

fn edge_counts(mesh: &TriMesh) -> (usize, usize) {
    let edges = mesh.edges();
    let boundary = edges.values().filter(|e| e.is_boundary()).count();
    (edges.len() - boundary, boundary)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn refinement_and_grading_keep_the_mesh_valid(times in 0usize..4, grade in prop::option::of(0.3f64..1.0)) {
        let base = l_shape(1).unwrap();
        let mut mesh = refined(&base, times);
        if let Some(mu) = grade {
            mesh = graded_refine(&mesh, 0, mu).unwrap();
        }
        prop_assert!(mesh.audit().is_ok());
        prop_assert!((mesh.total_area() - 3.0).abs() < 1e-12);
        prop_assert!((0..mesh.n_triangles()).all(|t| mesh.signed_area(t) > 0.0));
        // Euler: V - E + F = 1 for a simply connected polygon.
        let (inner, outer) = edge_counts(&mesh);
        prop_assert_eq!(mesh.n_vertices() + mesh.n_triangles(), inner + outer + 1);
        prop_assert_eq!(3 * mesh.n_triangles(), 2 * inner + outer);
    }

    #[test]
    fn corner_layers_are_disjoint_rings(k in 1usize..4, corner in 0usize..3) {
        let mesh = refined(&build_notched_rectangle(), 2);
        let layers = corner_layers(&mesh, corner, k).unwrap();
        prop_assert_eq!(layers.layers.len(), k);
        let tris = mesh.triangles();
        let verts = |layer: &[usize]| -> BTreeSet<usize> { layer.iter().flat_map(|&t| tris[t]).collect() };
        let v = mesh.corners()[corner].vertex_index;
        prop_assert!(layers.layers[0].iter().all(|&t| tris[t].contains(&v)));
        let mut seen = BTreeSet::new();
        for (i, layer) in layers.layers.iter().enumerate() {
            prop_assert!(!layer.is_empty());
            for &t in layer {
                prop_assert!(seen.insert(t), "triangle {} in two layers", t);
            }
            if i > 0 {
                let inner = verts(&layers.layers[i - 1]);
                prop_assert!(layer.iter().all(|&t| tris[t].iter().any(|w| inner.contains(w))));
            }
        }
    }
}

/// Patch vertices relative to the corner, sorted.
fn patch_offsets(mesh: &TriMesh, corner: usize, scale: f64) -> Vec<(f64, f64)> {
    let patch = corner_patch(mesh, corner).unwrap();
    let c = mesh.corners()[corner].corner.vertex;
    let mut pts: Vec<(f64, f64)> = patch.vertices().iter().map(|&p| {
        let d: Point2 = (p - c) * scale;
        (d.x, d.y)
    }).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts
}

#[test]
fn corner_patches_halve_under_refinement() {
    for base in [l_shape(1).unwrap(), build_notched_rectangle()] {
        let mut mesh = base;
        for _ in 0..3 {
            let next = uniform_refine(&mesh);
            for corner in 0..mesh.corners().len() {
                let coarse = patch_offsets(&mesh, corner, 0.5);
                let fine = patch_offsets(&next, corner, 1.0);
                assert_eq!(coarse.len(), fine.len());
                for (a, b) in coarse.iter().zip(&fine) {
                    assert!((a.0 - b.0).abs() <= 1e-14 && (a.1 - b.1).abs() <= 1e-14, "{a:?} vs {b:?}");
                }
            }
            mesh = next;
        }
    }
}

#[test]
fn notched_rectangle_has_the_expected_corners() {
    let mesh = build_notched_rectangle();
    let mut angles: Vec<f64> = mesh.corners().iter().map(|c| c.corner.theta / std::f64::consts::PI).collect();
    angles.sort_by(f64::total_cmp);
    assert!((angles[0] - 1.5).abs() < 1e-14 && (angles[1] - 1.75).abs() < 1e-14 && (angles[2] - 1.75).abs() < 1e-14);
    assert!((mesh.total_area() - 11.0).abs() < 1e-12);
}
