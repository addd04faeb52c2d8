//! Tabular output as CSV or JSON lines.
//!
//! CSV: header row, then `# key=value` metadata lines, then data rows.
//! Numbers carry 12 significant digits; lines end with LF.

use std::io::{self, Write};

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Num(v.unwrap_or(f64::NAN))
    }
}

/// Formats `v` with 12 significant digits, in positional notation when the
/// decimal exponent lies in `[-6, 15]` and in scientific notation otherwise.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-6..=15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let rounded: f64 = sci.parse().expect("round trip");
        trim_zeros(format!("{rounded:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_field(cell: &Cell) -> String {
    match cell {
        Cell::Num(v) => format_number(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Bool(v) => v.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

fn json_value(cell: &Cell) -> Value {
    match cell {
        Cell::Num(v) => format_number(*v)
            .parse::<f64>()
            .ok()
            .and_then(Number::from_f64)
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Cell::Int(v) => Value::from(*v),
        Cell::Bool(v) => Value::Bool(*v),
        Cell::Text(s) => Value::String(s.clone()),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub meta: Vec<(String, String)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn meta_num(&mut self, key: &str, value: f64) -> &mut Self {
        self.meta(key, format_number(value))
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{}", self.columns.join(","))?;
                for (k, v) in &self.meta {
                    writeln!(out, "# {k}={v}")?;
                }
                for row in &self.rows {
                    let fields: Vec<String> = row.iter().map(csv_field).collect();
                    writeln!(out, "{}", fields.join(","))?;
                }
            }
            Format::Jsonl => {
                for (k, v) in &self.meta {
                    let mut obj = Map::new();
                    obj.insert("#".into(), Value::String(format!("{k}={v}")));
                    writeln!(out, "{}", Value::Object(obj))?;
                }
                for row in &self.rows {
                    let mut obj = Map::new();
                    for (name, cell) in self.columns.iter().zip(row) {
                        obj.insert(name.clone(), json_value(cell));
                    }
                    writeln!(out, "{}", Value::Object(obj))?;
                }
            }
        }
        Ok(())
    }
}
