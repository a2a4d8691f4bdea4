//! One-dimensional Gauss-Legendre rules.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{Error, Result};

/// Gauss-Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone)]
pub(crate) struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes.push(0.5 * (1.0 - x));
            weights.push(0.5 * w);
        }
        GaussLegendre { nodes, weights }
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let len = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(a + s * len))
            .sum::<f64>()
            * len
    }

    /// Composite rule on `panels` equal sub-intervals.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let step = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * step;
                self.integrate(lo, lo + step, &mut f)
            })
            .sum()
    }

    /// Doubles the panel count until two successive composite estimates agree.
    pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        rel_tol: f64,
        mut f: F,
    ) -> Result<f64> {
        let mut panels = 1;
        let mut prev = self.integrate_composite(a, b, panels, &mut f);
        for _ in 0..14 {
            panels *= 2;
            let next = self.integrate_composite(a, b, panels, &mut f);
            let err = (next - prev).abs();
            if err <= rel_tol * next.abs().max(1e-300) || err < 1e-300 {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::QuadratureNotConverged {
            estimate: prev,
            error: rel_tol,
        })
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
