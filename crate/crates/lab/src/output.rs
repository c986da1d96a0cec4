//! Flat result tables and their CSV and JSON renderings.
//!
//! Reals are rounded to 12 significant digits and printed in the shortest
//! form that reads back to the rounded value; magnitudes outside
//! `[1e-6, 1e15)` switch to exponent notation. Non-finite values are refused.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_owned())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| (*c).to_owned()).collect(), rows: Vec::new() }
    }

    /// Appends a row; panics if its width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Real values of one column (integers are widened, other cells skipped).
    pub fn reals(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else { return Vec::new() };
        self.rows
            .iter()
            .filter_map(|r| match r[i] {
                Cell::Real(x) => Some(x),
                Cell::Int(x) => Some(x as f64),
                _ => None,
            })
            .collect()
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&self.columns.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for row in &self.rows {
            let mut fields = Vec::with_capacity(row.len());
            for (cell, name) in row.iter().zip(&self.columns) {
                fields.push(match cell {
                    Cell::Text(s) => csv_field(s),
                    other => scalar(other, name)?,
                });
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut out = String::from("[");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
            for (j, (cell, name)) in row.iter().zip(&self.columns).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let key = serde_json::to_string(name).expect("strings always serialize");
                let value = match cell {
                    Cell::Text(s) => serde_json::to_string(s).expect("strings always serialize"),
                    Cell::Empty => "null".to_owned(),
                    other => scalar(other, name)?,
                };
                let _ = write!(out, "{key}: {value}");
            }
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]\n" } else { "\n]\n" });
        Ok(out)
    }

    /// Renders and writes the table, or prints it when `path` is `None`.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> Result<()> {
        let text = self.render(format)?;
        match path {
            Some(p) => std::fs::write(p, text).map_err(|e| LabError::io(p, e)),
            None => std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| LabError::io("<stdout>", e)),
        }
    }
}

fn scalar(cell: &Cell, column: &str) -> Result<String> {
    Ok(match cell {
        Cell::Int(x) => x.to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Empty => String::new(),
        Cell::Real(x) => format_real(*x)
            .ok_or_else(|| LabError::config(column, format!("non-finite value {x} in output")))?,
        Cell::Text(s) => s.clone(),
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Rounds to 12 significant digits; `None` for NaN and infinities.
pub fn round_sig(x: f64) -> Option<f64> {
    if !x.is_finite() {
        return None;
    }
    Some(format!("{x:.11e}").parse().expect("exponent notation parses"))
}

pub fn format_real(x: f64) -> Option<String> {
    let r = round_sig(x)?;
    if r == 0.0 {
        return Some("0".to_owned());
    }
    let mag = r.abs();
    Some(if (1e-6..1e15).contains(&mag) { format!("{r}") } else { format!("{r:e}") })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn real_rendering() {
        assert_eq!(format_real(0.0).unwrap(), "0");
        assert_eq!(format_real(-0.0).unwrap(), "0");
        assert_eq!(format_real(0.25).unwrap(), "0.25");
        assert_eq!(format_real(1.0 / 3.0).unwrap(), "0.333333333333");
        assert_eq!(format_real(2.0 / 3.0 * 1e5).unwrap(), "66666.6666667");
        assert_eq!(format_real(1.5e-300).unwrap(), "1.5e-300");
        assert_eq!(format_real(123456789012345678.0).unwrap(), "1.23456789012e17");
        assert!(format_real(f64::NAN).is_none());
        assert!(format_real(f64::INFINITY).is_none());
    }

    #[test]
    fn csv_and_json_layout() {
        let mut t = Table::new(&["n", "rule", "b", "ok", "gap"]);
        t.push(vec![4u64.into(), "n^2".into(), 0.5.into(), true.into(), Cell::Empty]);
        t.push(vec![8u64.into(), "a,\"b\"".into(), (1.0 / 7.0).into(), false.into(), 1.0.into()]);
        assert_eq!(t.to_csv().unwrap(), "n,rule,b,ok,gap\n4,n^2,0.5,true,\n8,\"a,\"\"b\"\"\",0.142857142857,false,1\n");
        let json = t.to_json().unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed[1]["rule"], "a,\"b\"");
        assert_eq!(parsed[0]["gap"], serde_json::Value::Null);
        assert_eq!(parsed[1]["b"].as_f64().unwrap(), 0.142857142857);
        assert_eq!(Table::new(&["x"]).to_json().unwrap(), "[]\n");
    }

    #[test]
    fn non_finite_is_refused() {
        let mut t = Table::new(&["x"]);
        t.push(vec![f64::NAN.into()]);
        assert!(t.to_csv().is_err());
        assert!(t.to_json().is_err());
    }

    proptest! {
        #[test]
        fn rendering_keeps_twelve_digits(x in proptest::num::f64::NORMAL) {
            let text = format_real(x).unwrap();
            let back: f64 = text.parse().unwrap();
            prop_assert!((back - x).abs() <= 5e-12 * x.abs());
            let digits = text
                .split(['e', 'E'])
                .next()
                .unwrap()
                .chars()
                .filter(char::is_ascii_digit)
                .collect::<String>();
            let significant = digits.trim_start_matches('0').trim_end_matches('0');
            prop_assert!(significant.len() <= 12 || !text.contains('.'));
        }
    }
}
