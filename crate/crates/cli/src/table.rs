//! Column tables and their CSV / JSON renderings.
//!
//! Numbers are rounded to 12 significant digits before printing, so a table
//! renders to the same bytes on every run and both formats parse back to the
//! same values.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::{CliError, Result};

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Flag(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Rows of cells under a fixed header, plus ordered metadata.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: Vec<(String, Value)>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric view of one column (`NaN` for non-numeric cells).
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[k] {
                    Cell::Num(x) => *x,
                    Cell::Int(i) => *i as f64,
                    Cell::Flag(b) => f64::from(u8::from(*b)),
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }
}

/// `x` rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn format_number(x: f64) -> String {
    let r = round_sig(x);
    if r.is_nan() {
        return "NaN".into();
    }
    if r.is_infinite() {
        return if r > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = r.abs();
    if r == 0.0 || (1e-4..1e6).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(x) => format_number(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Flag(b) => b.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Num(x) => serde_json::Number::from_f64(round_sig(*x)).map_or(Value::Null, Value::Number),
        Cell::Int(i) => Value::from(*i),
        Cell::Flag(b) => Value::Bool(*b),
        Cell::Text(s) => Value::String(s.clone()),
    }
}

fn render_csv(table: &Table) -> Result<String> {
    let mut out = Vec::new();
    for (k, v) in &table.metadata {
        let text = match v {
            Value::String(s) => s.clone(),
            other => serde_json::to_string(other)?,
        };
        writeln!(out, "# {k}: {text}").expect("write to memory");
    }
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&table.columns)?;
        for row in &table.rows {
            w.write_record(row.iter().map(cell_text))?;
        }
        w.flush().expect("write to memory");
    }
    Ok(String::from_utf8(out).expect("utf-8 output"))
}

fn render_json(table: &Table) -> Result<String> {
    let metadata: Map<String, Value> = table.metadata.iter().cloned().collect();
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            Value::Object(
                table
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(cell_json))
                    .collect(),
            )
        })
        .collect();
    let mut doc = Map::new();
    doc.insert("metadata".into(), Value::Object(metadata));
    doc.insert("columns".into(), table.columns.clone().into());
    doc.insert("rows".into(), Value::Array(rows));
    let mut text = serde_json::to_string_pretty(&Value::Object(doc))?;
    text.push('\n');
    Ok(text)
}

pub fn render(table: &Table, format: Format) -> Result<String> {
    match format {
        Format::Csv => render_csv(table),
        Format::Json => render_json(table),
    }
}

pub fn emit(table: &Table, format: Format, path: &Path) -> Result<()> {
    let text = render(table, format)?;
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}
