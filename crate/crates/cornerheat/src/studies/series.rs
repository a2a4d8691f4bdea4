//! Per-step error series written as CSV.

use std::io;

use cornerheat_core::fem::{error_norm, NormKind, QuadratureRule};
use cornerheat_core::parabolic::Observer;
use cornerheat_core::{Point2, TriMesh};

pub const SERIES_HEADER: &str = "step,t,linf,l2_err,weighted_err";

/// Records `max |U^n|` and the errors against `exact(t, x)` every `stride`
/// steps (and at step 0).
pub struct SeriesObserver<'a, E> {
    mesh: &'a TriMesh,
    exact: E,
    weighted: NormKind,
    stride: usize,
    rule: QuadratureRule,
    rows: Vec<(usize, f64, f64, f64, f64)>,
}

impl<'a, E: Fn(f64, Point2) -> f64> SeriesObserver<'a, E> {
    pub fn new(mesh: &'a TriMesh, exact: E, alpha: f64, corner: usize, stride: usize) -> Self {
        SeriesObserver {
            mesh,
            exact,
            weighted: NormKind::WeightedL2 { alpha, corner },
            stride: stride.max(1),
            rule: QuadratureRule::default(),
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> crate::error::Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(SERIES_HEADER.split(','))?;
        for (step, t, linf, l2, weighted) in &self.rows {
            writer.write_record([step.to_string(), t.to_string(), linf.to_string(), l2.to_string(), weighted.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }
}

impl<E: Fn(f64, Point2) -> f64> Observer for SeriesObserver<'_, E> {
    fn observe(&mut self, step: usize, t: f64, state: &[f64]) -> cornerheat_core::Result<()> {
        if !step.is_multiple_of(self.stride) {
            return Ok(());
        }
        let u = |x: Point2| (self.exact)(t, x);
        let linf = state.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let l2 = error_norm(self.mesh, state, &u, NormKind::L2, &self.rule)?;
        let weighted = error_norm(self.mesh, state, &u, self.weighted, &self.rule)?;
        self.rows.push((step, t, linf, l2, weighted));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cornerheat_core::fem::interpolate;
    use cornerheat_core::mesh::build_l_shape;

    #[test]
    fn strided_rows_and_header() {
        let mesh = build_l_shape();
        let exact = |t: f64, x: Point2| t * x.x;
        let mut obs = SeriesObserver::new(&mesh, exact, 1.0 / 3.0, 0, 2);
        for step in 0..5 {
            let t = step as f64 * 0.1;
            let state = interpolate(&mesh, &|x: Point2| t * x.x);
            obs.observe(step, t, &state).unwrap();
        }
        assert_eq!(obs.len(), 3);
        let mut buf = Vec::new();
        obs.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SERIES_HEADER);
        let last: Vec<f64> = lines.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(last[0], 4.0);
        assert!((last[2] - 0.4).abs() < 1e-15);
        assert!(last[3] < 1e-14 && last[4] < 1e-14);
    }
}
