//! Tabular reports and their JSON and CSV renderings.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::formats::write_atomic;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    NormTable,
    RatioTable,
    EquivalenceTable,
    Diagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: ReportKind,
    pub spec_hash: String,
    pub tool_version: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    /// Per-group aggregates; kept in JSON, dropped by CSV.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub summary: BTreeMap<String, Value>,
}

/// Finite numbers as JSON numbers, the rest as `"inf"`, `"-inf"` or `"nan"`.
pub fn num(v: f64) -> Value {
    match serde_json::Number::from_f64(v) {
        Some(n) => Value::Number(n),
        None if v.is_nan() => Value::String("nan".into()),
        None if v > 0.0 => Value::String("inf".into()),
        None => Value::String("-inf".into()),
    }
}

/// Inverse of [`num`] for numeric cells.
pub fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.as_str() {
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            _ => None,
        },
        _ => None,
    }
}

impl Report {
    pub fn new(kind: ReportKind, spec_hash: String, columns: Vec<String>) -> Self {
        Report { kind, spec_hash, tool_version: TOOL_VERSION.to_string(), columns, rows: Vec::new(), summary: BTreeMap::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column, skipping non-numeric cells.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        match self.column(name) {
            Some(i) => self.rows.iter().filter_map(|r| r.get(i).and_then(as_f64)).collect(),
            None => Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Usage(format!("unknown report format `{s}`, expected csv or json"))),
        }
    }
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

pub fn render(report: &Report, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.columns)?;
            for row in &report.rows {
                w.write_record(row.iter().map(cell_text))?;
            }
            w.into_inner().map_err(|e| Error::Usage(format!("csv buffer: {e}")))
        }
    }
}

pub fn write_report(report: &Report, path: &Path, format: Format) -> Result<()> {
    write_atomic(path, &render(report, format)?)
}

/// Read a JSON report and write it out in `format`.
pub fn convert(input: &Path, output: &Path, format: Format) -> Result<()> {
    let report: Report = crate::formats::read_json(input)?;
    write_report(&report, output, format)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_cells() {
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
        assert_eq!(as_f64(&num(2.5)), Some(2.5));
        assert_eq!(as_f64(&num(f64::NEG_INFINITY)), Some(f64::NEG_INFINITY));
        assert!(as_f64(&Value::String("label".into())).is_none());
    }

    #[test]
    fn empty_report_is_header_only_csv() {
        let r = Report::new(ReportKind::NormTable, "h".into(), vec!["a".into(), "b".into()]);
        assert_eq!(String::from_utf8(render(&r, Format::Csv).unwrap()).unwrap(), "a,b\n");
    }

    #[test]
    fn unknown_format_is_a_usage_error() {
        assert!(matches!("xml".parse::<Format>(), Err(Error::Usage(_))));
    }
}
