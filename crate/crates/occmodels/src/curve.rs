//! Per-epoch training curves, serialized as CSV for inspection.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingCurve {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TrainingCurve {
    pub fn new(columns: &[&str]) -> TrainingCurve {
        TrainingCurve {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Validation(format!(
                "curve row has {} values, expected {}",
                row.len(),
                self.columns.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged(format!("non-finite training curve row {row:?}")));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TrainingCurve> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        let columns: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Validation("empty curve file".into()))?
            .split(',')
            .map(|s| s.to_string())
            .collect();
        let mut rows = Vec::new();
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|v| v.parse::<f64>()).collect();
            rows.push(row.map_err(|e| Error::Validation(format!("bad curve row: {e}")))?);
        }
        Ok(TrainingCurve {
            columns,
            rows,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip() {
        let mut c = TrainingCurve::new(&["epoch", "loss"]);
        c.push(vec![0.0, 1.5]).unwrap();
        c.push(vec![1.0, 0.75]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        c.save(&path).unwrap();
        let back = TrainingCurve::load(&path).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn non_finite_rows_are_rejected() {
        let mut c = TrainingCurve::new(&["epoch", "loss"]);
        assert!(c.push(vec![0.0, f64::NAN]).is_err());
    }
}
