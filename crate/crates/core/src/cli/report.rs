//! CSV and JSON report files.

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};
use std::fs;
use std::path::{Path, PathBuf};

use super::CliError;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(u64),
    Flag(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(k) => k.to_string(),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Num(x) => num(*x),
            Cell::Int(k) => Value::from(*k),
            Cell::Flag(b) => Value::Bool(*b),
        }
    }
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
    fn from(k: usize) -> Self {
        Cell::Int(k as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// 17 significant digits in scientific notation; `inf`, `-inf`, `NaN` otherwise.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A JSON number, or a string for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::String(fmt_num(x))
    }
}

/// Pretty printer that writes every float with 17 significant digits.
struct FixedDigits(PrettyFormatter<'static>);

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, x: f64) -> std::io::Result<()> {
        w.write_all(fmt_num(x).as_bytes())
    }
    fn begin_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + std::io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + std::io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with every float written by [`fmt_num`].
pub fn to_json_string(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    v.serialize(&mut ser).expect("value serializes");
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Table rows plus per-row detail objects carrying witnesses.
#[derive(Debug, Clone)]
pub struct Report {
    pub subcommand: String,
    pub seed: Option<u64>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub details: Vec<Value>,
    /// Extra top-level entries of the JSON document.
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn new(subcommand: &str, seed: Option<u64>, columns: Vec<&'static str>) -> Self {
        Report {
            subcommand: subcommand.to_string(),
            seed,
            columns,
            rows: Vec::new(),
            details: Vec::new(),
            summary: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>, detail: Value) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
        self.details.push(detail);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let k = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }

    pub fn csv_string(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn json_value(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .zip(&self.details)
            .map(|(row, detail)| {
                let mut m = Map::new();
                for (c, cell) in self.columns.iter().zip(row) {
                    m.insert(c.to_string(), cell.json());
                }
                if !detail.is_null() {
                    m.insert("detail".into(), detail.clone());
                }
                Value::Object(m)
            })
            .collect();
        let mut doc = self.summary.clone();
        doc.insert("subcommand".into(), Value::String(self.subcommand.clone()));
        doc.insert(
            "seed".into(),
            self.seed.map(Value::from).unwrap_or(Value::Null),
        );
        doc.insert(
            "columns".into(),
            Value::Array(
                self.columns
                    .iter()
                    .map(|c| Value::String(c.to_string()))
                    .collect(),
            ),
        );
        doc.insert("rows".into(), Value::Array(rows));
        Value::Object(doc)
    }

    /// Writes `<subcommand>.csv` and `<subcommand>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
        fn io(p: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
            move |e| CliError::Io(format!("{}: {e}", p.display()))
        }
        fs::create_dir_all(dir).map_err(io(dir))?;
        let csv_path = dir.join(format!("{}.csv", self.subcommand));
        let json_path = dir.join(format!("{}.json", self.subcommand));
        fs::write(&csv_path, self.csv_string()?).map_err(io(&csv_path))?;
        let mut text = to_json_string(&self.json_value());
        text.push('\n');
        fs::write(&json_path, text).map_err(io(&json_path))?;
        Ok((csv_path, json_path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_num(1.3), "1.3000000000000000e0");
        assert_eq!(fmt_num(-0.1), "-1.0000000000000001e-1");
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
        let back: f64 = fmt_num(0.1 + 0.2).parse().unwrap();
        assert_eq!(back, 0.1 + 0.2);
        assert_eq!(
            to_json_string(&json!([2.5, 1])),
            "[\n  2.5000000000000000e0,\n  1\n]"
        );
        let back: Value = serde_json::from_str(&to_json_string(&num(0.1))).unwrap();
        assert_eq!(back.as_f64(), Some(0.1));
    }

    #[test]
    fn csv_and_json_shape() {
        let mut r = Report::new("demo", Some(3), vec!["name", "value", "ok"]);
        r.push(vec!["a,b".into(), 1.0.into(), true.into()], Value::Null);
        let csv = r.csv_string().unwrap();
        assert_eq!(csv, "name,value,ok\n\"a,b\",1.0000000000000000e0,true\n");
        let j = r.json_value();
        assert_eq!(j["rows"][0]["ok"], Value::Bool(true));
        assert_eq!(j["seed"], Value::from(3u64));
    }
}
