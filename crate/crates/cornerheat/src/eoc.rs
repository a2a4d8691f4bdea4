//! Estimated orders of convergence under mesh halving.

use crate::error::{HarnessError, Result};

/// `rate_i = log2(err_{i-1} / err_i)`, one entry per consecutive pair.
pub fn compute_eoc(errors: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = errors.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(HarnessError::Eoc(format!("errors must be positive and finite, got {bad}")));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// Rates for a column with optional entries; a rate needs both neighbours.
pub fn column_rates(errors: &[Option<f64>]) -> Result<Vec<Option<f64>>> {
    let mut rates = vec![None; errors.len()];
    for i in 1..errors.len() {
        if let (Some(a), Some(b)) = (errors[i - 1], errors[i]) {
            rates[i] = Some(compute_eoc(&[a, b])?[0]);
        }
    }
    Ok(rates)
}

/// Least-squares slope of `-log2(err)` against the level index.
pub fn fitted_rate(errors: &[f64]) -> Result<f64> {
    compute_eoc(errors)?;
    if errors.len() < 2 {
        return Err(HarnessError::Eoc("a fit needs at least two errors".into()));
    }
    let n = errors.len() as f64;
    let xs: Vec<f64> = (0..errors.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = errors.iter().map(|e| -e.log2()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(num / den)
}

/// Limit and order of a sequence on three successive halvings, assuming
/// `q_i = q + c 2^{-p i}`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Extrapolation {
    pub limit: f64,
    pub order: f64,
}

pub fn richardson(q: [f64; 3]) -> Result<Extrapolation> {
    let (d1, d2) = (q[1] - q[0], q[2] - q[1]);
    let ratio = d1 / d2;
    if !(ratio > 1.0 && ratio.is_finite()) {
        return Err(HarnessError::Eoc(format!(
            "sequence {q:?} does not converge monotonically (difference ratio {ratio})"
        )));
    }
    Ok(Extrapolation {
        limit: q[2] + d2 / (ratio - 1.0),
        order: ratio.log2(),
    })
}
