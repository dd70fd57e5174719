//! Deterministic table emission: CSV with a `#`-prefixed header, or JSON
//! with explicit column order. Floats are printed in scientific notation at
//! a fixed number of significant digits, so identical runs produce
//! byte-identical data files. Timestamps appear only in the metadata
//! sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// One table cell; numbers keep their type so JSON output stays typed.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

/// Column-ordered table with fixed formatting.
#[derive(Debug, Clone)]
pub struct TableDoc {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl TableDoc {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv(&self, precision: usize) -> String {
        let mut out = String::new();
        out.push_str("# ");
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::F(v) => push_float(&mut out, *v, precision),
                    Cell::I(v) => {
                        let _ = write!(out, "{v}");
                    }
                    Cell::S(s) => out.push_str(s),
                }
            }
            out.push('\n');
        }
        out
    }

    fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                serde_json::Value::Array(
                    row.iter()
                        .map(|c| match c {
                            Cell::F(v) => serde_json::Number::from_f64(*v)
                                .map(serde_json::Value::Number)
                                .unwrap_or(serde_json::Value::Null),
                            Cell::I(v) => serde_json::Value::from(*v),
                            Cell::S(s) => serde_json::Value::from(s.as_str()),
                        })
                        .collect(),
                )
            })
            .collect();
        let doc = serde_json::json!({ "columns": self.columns, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serialization");
        s.push('\n');
        s
    }
}

/// `precision` significant digits, scientific notation; non-finite values
/// become `nan`/`inf`/`-inf`.
fn push_float(out: &mut String, v: f64, precision: usize) {
    if v.is_nan() {
        out.push_str("nan");
    } else if v.is_infinite() {
        out.push_str(if v > 0.0 { "inf" } else { "-inf" });
    } else {
        let _ = write!(out, "{:.*e}", precision.saturating_sub(1), v);
    }
}

/// Writes `<stem>.csv` or `<stem>.json` and returns the path.
pub fn write_table(
    out_dir: &Path,
    stem: &str,
    format: Format,
    doc: &TableDoc,
    precision: usize,
) -> Result<PathBuf> {
    let (name, body) = match format {
        Format::Csv => (format!("{stem}.csv"), doc.to_csv(precision)),
        Format::Json => (format!("{stem}.json"), doc.to_json()),
    };
    let path = out_dir.join(name);
    fs::write(&path, body)
        .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Writes the `<stem>.meta.json` sidecar (the only place timestamps live).
pub fn write_meta(out_dir: &Path, stem: &str, meta: &serde_json::Value) -> Result<PathBuf> {
    let path = out_dir.join(format!("{stem}.meta.json"));
    let mut body = serde_json::to_string_pretty(meta)
        .map_err(|e| Error::Io(format!("metadata serialization: {e}")))?;
    body.push('\n');
    fs::write(&path, body)
        .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Writes an auxiliary summary JSON next to the data file.
pub fn write_summary(out_dir: &Path, stem: &str, summary: &serde_json::Value) -> Result<PathBuf> {
    let path = out_dir.join(format!("{stem}.summary.json"));
    let mut body = serde_json::to_string_pretty(summary)
        .map_err(|e| Error::Io(format!("summary serialization: {e}")))?;
    body.push('\n');
    fs::write(&path, body)
        .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
