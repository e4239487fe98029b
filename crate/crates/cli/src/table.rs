//! Flat result tables and their CSV / JSON encodings.

use std::fmt::Write as _;
use std::io::{self, Write};

use serde_json::{Map, Number, Value as Json};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
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
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    // 17 significant digits, locale independent.
                    Cell::Num(v) if v.is_finite() => write!(out, "{v:.16e}").unwrap(),
                    Cell::Num(v) => write!(out, "{v}").unwrap(),
                    Cell::Int(v) => write!(out, "{v}").unwrap(),
                    Cell::Bool(b) => write!(out, "{b}").unwrap(),
                    Cell::Text(s) => out.push_str(s),
                    Cell::Empty => {}
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json_value(&self) -> Json {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    let v = match cell {
                        Cell::Num(v) => Number::from_f64(*v).map_or(Json::Null, Json::Number),
                        Cell::Int(v) => Json::from(*v),
                        Cell::Bool(b) => Json::Bool(*b),
                        Cell::Text(s) => Json::String(s.clone()),
                        Cell::Empty => Json::Null,
                    };
                    obj.insert((*name).to_owned(), v);
                }
                Json::Object(obj)
            })
            .collect();
        Json::Array(rows)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn write_to(&self, format: Format, mut w: impl Write) -> io::Result<()> {
        w.write_all(self.render(format).as_bytes())?;
        w.flush()
    }
}
