//! Per-level experiment records, convergence rates and serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// `rate_k = log(e_k / e_{k+1}) / log(h_k / h_{k+1})`.
pub fn eoc(errors: &[f64], hs: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != hs.len() || errors.len() < 2 {
        return Err(Error::InvalidArgument("need equal-length error and h lists of length >= 2".into()));
    }
    if errors.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument("errors must be positive and finite".into()));
    }
    if hs.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0)) {
        return Err(Error::InvalidArgument("mesh sizes must be positive and strictly decreasing".into()));
    }
    Ok(errors
        .windows(2)
        .zip(hs.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportRow {
    pub level: usize,
    pub h: f64,
    pub dofs: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub quantities: Vec<String>,
    /// Quantities that get an `eoc_` column.
    pub eoc_of: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, quantities: &[&str], eoc_of: &[&str]) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            version: VERSION.to_string(),
            config: BTreeMap::new(),
            quantities: quantities.iter().map(|s| s.to_string()).collect(),
            eoc_of: eoc_of.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_config(mut self, config: &BTreeMap<String, String>) -> Self {
        self.config.extend(config.iter().map(|(k, v)| (k.clone(), v.clone())));
        self
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    pub fn push(&mut self, level: usize, h: f64, dofs: usize, values: Vec<f64>) {
        assert_eq!(values.len(), self.quantities.len());
        if let Some(last) = self.rows.last() {
            assert!(h < last.h, "levels must have strictly decreasing h");
        }
        self.rows.push(ReportRow { level, h, dofs, values });
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.quantities.iter().position(|q| q == name)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }

    pub fn hs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h).collect()
    }

    /// Rates between consecutive levels; `None` where undefined.
    pub fn eoc_column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let col = self.column(name)?;
        let hs = self.hs();
        Some(
            (0..col.len())
                .map(|k| {
                    if k == 0 {
                        return None;
                    }
                    eoc(&col[k - 1..=k], &hs[k - 1..=k]).ok().map(|r| r[0])
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,h,dofs");
        for q in &self.quantities {
            let _ = write!(out, ",{q}");
        }
        for q in &self.eoc_of {
            let _ = write!(out, ",eoc_{q}");
        }
        out.push('\n');
        let rates: Vec<Vec<Option<f64>>> = self.eoc_of.iter().map(|q| self.eoc_column(q).unwrap_or_default()).collect();
        for (k, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{},{:e},{}", row.level, row.h, row.dofs);
            for v in &row.values {
                let _ = write!(out, ",{v:e}");
            }
            for r in &rates {
                match r.get(k).copied().flatten() {
                    Some(v) => {
                        let _ = write!(out, ",{v:.6}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let mut vals = serde_json::Map::new();
                for (q, v) in self.quantities.iter().zip(&r.values) {
                    vals.insert(q.clone(), json!(v));
                }
                for q in &self.eoc_of {
                    let rate = self.eoc_column(q).and_then(|c| c[k]);
                    vals.insert(format!("eoc_{q}"), json!(rate));
                }
                json!({ "level": r.level, "h": r.h, "dofs": r.dofs, "values": vals })
            })
            .collect();
        json!({
            self.experiment.clone(): {
                "version": self.version,
                "config": self.config,
                "rows": rows,
                "notes": self.notes,
            }
        })
    }

    /// Writes `<dir>/<experiment>.csv` and `<dir>/<experiment>.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.csv", self.experiment)), self.to_csv())?;
        let json = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(dir.join(format!("{}.json", self.experiment)), json + "\n")?;
        Ok(())
    }
}
