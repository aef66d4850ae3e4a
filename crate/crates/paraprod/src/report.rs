//! Deterministic tabular reporting: CSV tables for per-trial rows and JSON
//! summaries with stable key ordering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;

/// A value in a report cell; numbers are rendered with a fixed format so the
/// output is byte-stable across runs.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    /// Numeric value of the cell, if it holds one.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format!("{v:.12e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReportTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Summary values rendered as JSON alongside the table.
    pub summary: BTreeMap<String, Cell>,
}

impl ReportTable {
    pub fn new(columns: &[&str]) -> Self {
        ReportTable {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn set_summary(&mut self, key: &str, value: Cell) {
        self.summary.insert(key.to_string(), value);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let mut out = String::from("{");
        let mut first = true;
        for (k, v) in &self.summary {
            if !first {
                out.push(',');
            }
            first = false;
            match v {
                Cell::Int(n) => {
                    let _ = write!(out, "\"{k}\":{n}");
                }
                Cell::Num(x) => {
                    let _ = write!(out, "\"{k}\":\"{x:.12e}\"");
                }
                Cell::Text(s) => {
                    let _ = write!(out, "\"{k}\":{}", serde_json::to_string(s).unwrap());
                }
            }
        }
        out.push('}');
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Two-column (x, y) dump for external plotting tools.
    pub fn plot_data(&self, x_col: &str, y_col: &str) -> Option<String> {
        let xi = self.columns.iter().position(|c| c == x_col)?;
        let yi = self.columns.iter().position(|c| c == y_col)?;
        let mut out = String::new();
        for row in &self.rows {
            let _ = writeln!(out, "{} {}", row[xi].render(), row[yi].render());
        }
        Some(out)
    }
}

/// Least-squares slope of y against x; None when x has no spread.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// p-th percentile (0..=100) by nearest-rank on a sorted copy.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((p / 100.0) * (v.len() as f64 - 1.0)).round() as usize;
    v[rank.min(v.len() - 1)]
}
