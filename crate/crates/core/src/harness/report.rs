//! Report tables and the CSV surfaces of the crate.
//!
//! Numbers are rendered with 17 significant digits so every `f64`
//! round-trips exactly through the emitted files. Fields are quoted only
//! when they contain a separator, quote or line break; lines end with LF.

use std::fmt::Write as _;
use std::path::Path;

use crate::cocoa::SolveTrajectory;
use crate::error::{Error, Result};
use crate::Matrix;

/// One scalar cell of a report table.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) => format_float(*v),
            Value::Text(v) => v.clone(),
        }
    }
}

/// Round-trippable decimal rendering of an `f64` (17 significant digits).
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Rectangular result table with a provenance echo of the producing plan.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    /// Key/value echo of the plan and seed that produced the table.
    pub provenance: Vec<(String, String)>,
}

impl ReportTable {
    pub fn new(header: impl IntoIterator<Item = impl Into<String>>) -> Self {
        ReportTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row arity must match the header"
        );
        self.rows.push(row);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.provenance.push((key.into(), value.to_string()));
    }

    /// RFC-4180-style rendering, header first, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        write_record(&mut out, self.header.iter().map(String::as_str));
        for row in &self.rows {
            let rendered: Vec<String> = row.iter().map(Value::render).collect();
            write_record(&mut out, rendered.iter().map(String::as_str));
        }
        out
    }
}

fn write_record<'a>(out: &mut String, fields: impl Iterator<Item = &'a str>) {
    let mut first = true;
    for field in fields {
        if !first {
            out.push(',');
        }
        first = false;
        let _ = write!(out, "{}", escape_field(field));
    }
    out.push('\n');
}

fn escape_field(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Writes the table to `path` as CSV.
pub fn emit_csv(table: &ReportTable, path: &Path) -> Result<()> {
    std::fs::write(path, table.to_csv()).map_err(|e| Error::io(path, e))
}

/// Serializes a matrix as `row_index,col_index,value` triplets in
/// row-major order.
pub fn write_matrix_csv(m: &Matrix, path: &Path) -> Result<()> {
    let mut out = String::from("row_index,col_index,value\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let _ = writeln!(out, "{i},{j},{}", format_float(m[(i, j)]));
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a matrix from the `row_index,col_index,value` format. Every cell
/// must be present exactly once.
pub fn read_matrix_csv(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_csv(&text)
}

pub(crate) fn parse_matrix_csv(text: &str) -> Result<Matrix> {
    let mut lines = text.lines();
    match lines.next() {
        Some("row_index,col_index,value") => {}
        other => {
            return Err(Error::Format(format!(
                "expected matrix CSV header, found {other:?}"
            )))
        }
    }
    let mut triplets = Vec::new();
    let mut rows = 0usize;
    let mut cols = 0usize;
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let parse_err = || Error::Format(format!("bad matrix CSV record on line {}", lineno + 2));
        let i: usize = parts.next().ok_or_else(parse_err)?.parse().map_err(|_| parse_err())?;
        let j: usize = parts.next().ok_or_else(parse_err)?.parse().map_err(|_| parse_err())?;
        let v: f64 = parts.next().ok_or_else(parse_err)?.parse().map_err(|_| parse_err())?;
        if parts.next().is_some() {
            return Err(parse_err());
        }
        rows = rows.max(i + 1);
        cols = cols.max(j + 1);
        triplets.push((i, j, v));
    }
    if triplets.len() != rows * cols {
        return Err(Error::Format(format!(
            "matrix CSV holds {} cells but dimensions {rows}x{cols} need {}",
            triplets.len(),
            rows * cols
        )));
    }
    let mut m = Matrix::from_element(rows, cols, f64::NAN);
    for (i, j, v) in triplets {
        if !m[(i, j)].is_nan() {
            return Err(Error::Format(format!("duplicate matrix CSV cell ({i}, {j})")));
        }
        m[(i, j)] = v;
    }
    if m.iter().any(|v| v.is_nan()) {
        return Err(Error::Format("matrix CSV leaves cells unspecified".into()));
    }
    Ok(m)
}

/// Writes a solver trajectory as `iteration,node,component_index,value`,
/// where `component_index` counts within the node's block.
pub fn write_trajectory_csv(traj: &SolveTrajectory, path: &Path) -> Result<()> {
    let mut out = String::from("iteration,node,component_index,value\n");
    let offsets = traj.partition.offsets();
    let sizes = traj.partition.sizes();
    for (t, estimate) in traj.estimates.iter().enumerate() {
        for (node, (&offset, &size)) in offsets.iter().zip(sizes).enumerate() {
            for idx in 0..size {
                let _ = writeln!(
                    out,
                    "{t},{node},{idx},{}",
                    format_float(estimate[offset + idx])
                );
            }
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
