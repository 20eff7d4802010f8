//! Tabular output shared by all subcommands: CSV (header row, `.` decimal
//! separator, 9 significant digits) or a JSON array of row objects.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CSV_DIGITS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_sig(*x, CSV_DIGITS),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) => round_sig(*x, CSV_DIGITS)
                .and_then(serde_json::Number::from_f64)
                .map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::Int(i) => (*i).into(),
            Cell::Text(s) => s.clone().into(),
            Cell::Bool(b) => (*b).into(),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

fn round_sig(x: f64, digits: usize) -> Option<f64> {
    if !x.is_finite() {
        return None;
    }
    let r: f64 = format!("{:.*e}", digits - 1, x).parse().ok()?;
    // no negative zero in output
    Some(if r == 0.0 { 0.0 } else { r })
}

/// `x` rounded to `digits` significant digits, printed in plain decimal.
pub fn format_sig(x: f64, digits: usize) -> String {
    match round_sig(x, digits) {
        Some(r) => format!("{r}"),
        None if x.is_nan() => "NaN".into(),
        None if x > 0.0 => "inf".into(),
        None => "-inf".into(),
    }
}

/// A closed pipe (`loattack figure --id 2 | head`) is not an error.
pub fn write_stdout(bytes: &[u8]) -> CliResult<()> {
    match std::io::stdout().lock().write_all(bytes) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: Vec<&'static str>) -> Self {
        Self {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.headers).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> CliResult<Vec<u8>> {
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| {
                self.headers
                    .iter()
                    .zip(row)
                    .map(|(h, c)| (h.to_string(), c.to_json()))
                    .collect()
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&rows).map_err(|e| CliError::Io(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Writes to `path`, or to standard output when `path` is `None`.
    pub fn write(&self, path: Option<&Path>, format: Format) -> CliResult<()> {
        let bytes = self.render(format)?;
        match path {
            Some(p) => std::fs::write(p, bytes)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
            None => write_stdout(&bytes),
        }
    }
}
