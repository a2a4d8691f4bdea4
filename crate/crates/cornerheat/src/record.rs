//! Per-level convergence tables and their CSV form.

use std::io;

use serde::{Deserialize, Serialize};

use crate::eoc::column_rates;
use crate::error::{HarnessError, Result};

pub const CSV_HEADER: &str =
    "level,h,dofs,dt,err_l2,rate_l2,err_weighted,rate_weighted,err_post,rate_post,k1h,wall_seconds";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: u32,
    pub h: f64,
    pub dofs: usize,
    pub dt: Option<f64>,
    pub err_l2: Option<f64>,
    pub rate_l2: Option<f64>,
    pub err_weighted: Option<f64>,
    pub rate_weighted: Option<f64>,
    pub err_post: Option<f64>,
    pub rate_post: Option<f64>,
    pub k1h: Option<f64>,
    pub wall_seconds: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub label: String,
    pub rows: Vec<LevelRecord>,
}

impl ConvergenceRecord {
    pub fn new(label: impl Into<String>) -> Self {
        ConvergenceRecord {
            label: label.into(),
            rows: Vec::new(),
        }
    }

    /// Appends a row (rate fields are ignored) and recomputes all rates.
    pub fn push(&mut self, row: LevelRecord) -> Result<()> {
        self.rows.push(row);
        self.update_rates()
    }

    fn update_rates(&mut self) -> Result<()> {
        let l2 = column_rates(&self.column(|r| r.err_l2))?;
        let w = column_rates(&self.column(|r| r.err_weighted))?;
        let p = column_rates(&self.column(|r| r.err_post))?;
        for (i, row) in self.rows.iter_mut().enumerate() {
            row.rate_l2 = l2[i];
            row.rate_weighted = w[i];
            row.rate_post = p[i];
        }
        Ok(())
    }

    pub fn column(&self, f: impl Fn(&LevelRecord) -> Option<f64>) -> Vec<Option<f64>> {
        self.rows.iter().map(f).collect()
    }

    /// Rates of the last `n` rows in a column, oldest first.
    pub fn last_rates(&self, n: usize, f: impl Fn(&LevelRecord) -> Option<f64>) -> Vec<Option<f64>> {
        let col = self.column(f);
        col[col.len().saturating_sub(n)..].to_vec()
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<()> {
        let mut writer = csv::WriterBuilder::new().has_headers(true).from_writer(w);
        for row in &self.rows {
            writer.serialize(row)?;
        }
        if self.rows.is_empty() {
            writer.write_record(CSV_HEADER.split(','))?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_csv<R: io::Read>(label: &str, r: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
        if header.join(",") != CSV_HEADER {
            return Err(HarnessError::Config(format!("unexpected CSV header `{}`", header.join(","))));
        }
        let rows = reader.deserialize().collect::<std::result::Result<Vec<LevelRecord>, _>>()?;
        Ok(ConvergenceRecord {
            label: label.into(),
            rows,
        })
    }

    /// Checks every stored rate against the adjacent errors.
    pub fn audit(&self) -> Result<()> {
        let mut fresh = self.clone();
        fresh.update_rates()?;
        for (row, want) in self.rows.iter().zip(&fresh.rows) {
            for (got, want, name) in [
                (row.rate_l2, want.rate_l2, "rate_l2"),
                (row.rate_weighted, want.rate_weighted, "rate_weighted"),
                (row.rate_post, want.rate_post, "rate_post"),
            ] {
                let ok = match (got, want) {
                    (None, None) => true,
                    (Some(a), Some(b)) => (a - b).abs() <= 1e-12 * (1.0 + b.abs()),
                    _ => false,
                };
                if !ok {
                    return Err(HarnessError::Eoc(format!(
                        "{}: {name} at level {} is {got:?}, adjacent errors give {want:?}",
                        self.label, row.level
                    )));
                }
            }
        }
        Ok(())
    }
}
