//! Long-format tables rendered as CSV or JSON.
//!
//! CSV numbers use `{:.16e}` (17 significant digits, exact round trip); JSON
//! numbers use the shortest exact representation, so both parse to the same
//! `f64`. Non-finite numbers are `NaN`/`inf` in CSV and `null` in JSON.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Flag(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_nan() => "NaN".into(),
            Cell::Num(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Flag(b) => (*b as u8).to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Flag(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// Everything one command emits.
pub struct Report {
    pub command: &'static str,
    pub config: Vec<(String, String)>,
    pub table: Table,
}

impl Report {
    pub fn csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# sagnac {}", self.command).unwrap();
        writeln!(out, "# units: frequencies in mu^-2, times in mu^2, hbar = 1").unwrap();
        for (key, value) in &self.config {
            writeln!(out, "# {key} = {value}").unwrap();
        }
        writeln!(out, "{}", self.table.columns.join(",")).unwrap();
        for row in &self.table.rows {
            writeln!(out, "{}", row.iter().map(Cell::csv).collect::<Vec<_>>().join(",")).unwrap();
        }
        out
    }

    pub fn json(&self) -> String {
        let config: Map<String, Value> = self.config.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let rows: Vec<Value> = self
            .table
            .rows
            .iter()
            .map(|row| Value::Object(self.table.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect()))
            .collect();
        let doc = json!({ "command": self.command, "units": "frequencies in mu^-2, times in mu^2, hbar = 1", "config": config, "rows": rows });
        serde_json::to_string_pretty(&doc).unwrap() + "\n"
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    /// Writes to `out`, or standard output when `out` is `None`.
    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let text = self.render(format);
        match out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => std::io::stdout().write_all(text.as_bytes()).context("writing to stdout"),
        }
    }
}
