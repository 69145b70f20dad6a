//! Tabular output as CSV or JSON.
//!
//! Numbers carry 6 significant digits unless full precision is requested.
//! Infinities are written as `inf`/`-inf` in CSV; in JSON the value becomes
//! `null` and a sibling `<column>_inf` field holds `"+inf"` or `"-inf"`.

use std::io::Write;

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
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
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// One or more named tables. CSV writes them in order, separated by a blank
/// line; JSON writes an object keyed by table name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputDocument {
    pub tables: Vec<Table>,
}

impl OutputDocument {
    pub fn single(table: Table) -> Self {
        Self {
            tables: vec![table],
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn render(&self, format: Format, full_precision: bool) -> Vec<u8> {
        match format {
            Format::Csv => self.to_csv(full_precision),
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(&self.to_json(full_precision))
                    .expect("JSON values always serialize");
                out.push(b'\n');
                out
            }
        }
    }

    fn to_csv(&self, full_precision: bool) -> Vec<u8> {
        let mut out = Vec::new();
        for (k, t) in self.tables.iter().enumerate() {
            if k > 0 {
                out.push(b'\n');
            }
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&t.columns).expect("in-memory write");
            for row in &t.rows {
                w.write_record(row.iter().map(|c| csv_cell(c, full_precision)))
                    .expect("in-memory write");
            }
            w.flush().expect("in-memory write");
        }
        out
    }

    fn to_json(&self, full_precision: bool) -> Value {
        let mut doc = Map::new();
        for t in &self.tables {
            let rows = t
                .rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (col, cell) in t.columns.iter().zip(row) {
                        match cell {
                            Cell::Num(x) if x.is_infinite() => {
                                obj.insert(col.clone(), Value::Null);
                                let sign = if *x > 0.0 { "+inf" } else { "-inf" };
                                obj.insert(format!("{col}_inf"), Value::from(sign));
                            }
                            Cell::Num(x) => {
                                let v = if full_precision { *x } else { round_sig(*x) };
                                obj.insert(
                                    col.clone(),
                                    Number::from_f64(v).map_or(Value::Null, Value::Number),
                                );
                            }
                            Cell::Int(i) => {
                                obj.insert(col.clone(), Value::from(*i));
                            }
                            Cell::Bool(b) => {
                                obj.insert(col.clone(), Value::from(*b));
                            }
                            Cell::Text(s) => {
                                obj.insert(col.clone(), Value::from(s.as_str()));
                            }
                        }
                    }
                    Value::Object(obj)
                })
                .collect();
            doc.insert(t.name.clone(), Value::Array(rows));
        }
        Value::Object(doc)
    }
}

fn csv_cell(c: &Cell, full_precision: bool) -> String {
    match c {
        Cell::Num(x) => format_num(*x, full_precision),
        Cell::Int(i) => i.to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

const SIG_DIGITS: usize = 6;

/// Rounds to 6 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Locale-independent decimal text for a number.
pub fn format_num(x: f64, full_precision: bool) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let v = if full_precision { x } else { round_sig(x) };
    let a = v.abs();
    if v != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn write_output(bytes: &[u8], out: Option<&std::path::Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_num(4.151_078_9, false), "4.15108");
        assert_eq!(format_num(3.0, false), "3");
        assert_eq!(format_num(0.000_123_456_78, false), "0.000123457");
        assert_eq!(format_num(1.234_567e-20, false), "1.23457e-20");
        assert_eq!(format_num(f64::INFINITY, false), "inf");
        assert_eq!(format_num(f64::NEG_INFINITY, false), "-inf");
        assert_eq!(format_num(0.1 + 0.2, true), "0.30000000000000004");
    }

    #[test]
    fn csv_has_header_and_quotes() {
        let mut t = Table::new("t", &["name", "x"]);
        t.push(vec!["a,b".into(), 1.5.into()]);
        t.push(vec!["c".into(), f64::INFINITY.into()]);
        let text = String::from_utf8(OutputDocument::single(t).render(Format::Csv, false)).unwrap();
        assert_eq!(text, "name,x\n\"a,b\",1.5\nc,inf\n");
    }

    #[test]
    fn json_flags_infinity() {
        let mut t = Table::new("rows", &["z_cb", "n"]);
        t.push(vec![f64::INFINITY.into(), 3usize.into()]);
        let v: Value =
            serde_json::from_slice(&OutputDocument::single(t).render(Format::Json, false)).unwrap();
        assert_eq!(v["rows"][0]["z_cb"], Value::Null);
        assert_eq!(v["rows"][0]["z_cb_inf"], "+inf");
        assert_eq!(v["rows"][0]["n"], 3);
    }
}
