//! Experiment reports: verdict records, ladder tables and fitted constants,
//! written as `report.json`, `tables/<name>.csv` and `fields/<name>.bin`.

use crate::error::Result;
use parabolic_core::SampledField;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        let pass = value.is_finite()
            && match relation {
                Relation::AtMost => value <= threshold,
                Relation::AtLeast => value >= threshold,
            };
        Self { name: name.into(), value, threshold, relation, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A sampled field written next to the report, with an optional CSV copy.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub name: String,
    pub field: SampledField,
    pub csv: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    /// Statements of the estimates the experiment exercises.
    pub statements: Vec<String>,
    pub config: Value,
    pub checks: Vec<CheckRecord>,
    pub tables: Vec<Table>,
    pub constants: BTreeMap<String, f64>,
    /// Set when a module error aborted the run.
    pub error: Option<String>,
    pub threads: usize,
    pub versions: BTreeMap<String, String>,
    pub wall_clock_seconds: f64,
    #[serde(skip)]
    pub dumps: Vec<FieldDump>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, statements: &[&str], config: Value) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("parabolic-harness".into(), env!("CARGO_PKG_VERSION").into());
        versions.insert("parabolic-core".into(), parabolic_core::VERSION.into());
        Self {
            experiment: experiment.into(),
            statements: statements.iter().map(|s| s.to_string()).collect(),
            config,
            checks: Vec::new(),
            tables: Vec::new(),
            constants: BTreeMap::new(),
            error: None,
            threads: rayon::current_num_threads(),
            versions,
            wall_clock_seconds: 0.0,
            dumps: Vec::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> bool {
        let rec = CheckRecord::new(name, value, relation, threshold);
        let pass = rec.pass;
        self.checks.push(rec);
        pass
    }

    /// Records a boolean verdict as `1 ≥ 1` or `0 ≥ 1`.
    pub fn check_flag(&mut self, name: impl Into<String>, ok: bool) -> bool {
        self.check(name, if ok { 1.0 } else { 0.0 }, Relation::AtLeast, 1.0)
    }

    pub fn constant(&mut self, name: impl Into<String>, value: f64) {
        self.constants.insert(name.into(), value);
    }

    pub fn dump(&mut self, name: impl Into<String>, field: SampledField, csv: bool) {
        self.dumps.push(FieldDump { name: name.into(), field, csv });
    }

    pub fn find(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// The report without wall-clock fields.
    pub fn reproducible_view(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("wall_clock_seconds");
        v
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir.join("tables"))?;
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)?)?;
        for t in &self.tables {
            t.write_csv(&dir.join("tables").join(format!("{}.csv", t.name)))?;
        }
        if !self.dumps.is_empty() {
            std::fs::create_dir_all(dir.join("fields"))?;
        }
        for d in &self.dumps {
            d.field.write_binary(dir.join("fields").join(format!("{}.bin", d.name)))?;
            if d.csv {
                d.field.write_csv(dir.join("fields").join(format!("{}.csv", d.name)))?;
            }
        }
        Ok(())
    }
}

/// Least-squares slope of `ln e` against `ln h`; non-positive errors are skipped.
pub fn fitted_rate(h: &[f64], e: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = h.iter().zip(e).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_of_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((fitted_rate(&h, &e) - 2.0).abs() < 1e-12);
        assert!(fitted_rate(&[0.1], &[1.0]).is_nan());
    }

    #[test]
    fn nan_never_passes() {
        assert!(!CheckRecord::new("x", f64::NAN, Relation::AtMost, 1.0).pass);
        assert!(CheckRecord::new("x", 1.0, Relation::AtMost, 1.0).pass);
        assert!(!CheckRecord::new("x", 0.5, Relation::AtLeast, 1.0).pass);
    }

    #[test]
    fn writes_json_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = ExperimentReport::new("demo", &["a statement"], Value::Null);
        r.check("c", 0.5, Relation::AtMost, 1.0);
        let mut t = Table::new("ladder", &["h", "error"]);
        t.push(vec![0.1, 1e-3]);
        r.tables.push(t);
        r.write(dir.path()).unwrap();
        let back: ExperimentReport = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(back.checks, r.checks);
        let csv = std::fs::read_to_string(dir.path().join("tables/ladder.csv")).unwrap();
        assert!(csv.starts_with("h,error\n"));
    }
}
