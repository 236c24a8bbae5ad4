//! Tables and summaries in CSV or JSON with fixed 17-significant-digit numbers.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
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
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
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

pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

/// Rows under fixed headers; `key` is the JSON array name ("points" or "samples").
#[derive(Debug, Clone)]
pub struct Table {
    pub key: &'static str,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// Ordered key/value summary.
#[derive(Debug, Clone, Default)]
pub struct Summary(pub Vec<(&'static str, Cell)>);

impl Summary {
    pub fn push(&mut self, key: &'static str, v: impl Into<Cell>) {
        self.0.push((key, v.into()));
    }

    pub fn write_text(&self, w: &mut dyn Write) -> std::io::Result<()> {
        for (k, v) in &self.0 {
            writeln!(w, "{k}: {}", v.text())?;
        }
        Ok(())
    }
}

pub fn write_csv(table: &Table, w: &mut dyn Write) -> Result<(), csv::Error> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(&table.headers)?;
    for row in &table.rows {
        out.write_record(row.iter().map(Cell::text))?;
    }
    out.flush()?;
    Ok(())
}

pub fn to_json(table: &Table, summary: &Summary) -> Value {
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (h, c) in table.headers.iter().zip(row) {
                m.insert(h.to_string(), c.json());
            }
            Value::Object(m)
        })
        .collect();
    let mut s = Map::new();
    for (k, v) in &summary.0 {
        s.insert(k.to_string(), v.json());
    }
    let mut root = Map::new();
    root.insert(table.key.to_string(), Value::Array(rows));
    root.insert("summary".into(), Value::Object(s));
    Value::Object(root)
}

pub fn write_table(
    table: &Table,
    summary: &Summary,
    format: Format,
    w: &mut dyn Write,
) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io { path: "output".into(), source: e };
    match format {
        Format::Csv => write_csv(table, w).map_err(|e| CliError::Io {
            path: "output".into(),
            source: e.into(),
        }),
        Format::Json => {
            let text = serde_json::to_string_pretty(&to_json(table, summary)).expect("json values serialize");
            w.write_all(text.as_bytes()).map_err(io)?;
            w.write_all(b"\n").map_err(io)
        }
    }
}

/// Writes the table to `path`, or to `stdout` when no path is given.
/// The text summary goes to `stdout` in the first case and `stderr` in the second.
pub fn emit(
    table: &Table,
    summary: &Summary,
    format: Format,
    path: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let io = |p: &Path| {
        let p = p.display().to_string();
        move |source| CliError::Io { path: p.clone(), source }
    };
    match path {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(io(p))?;
            let mut buf = std::io::BufWriter::new(file);
            write_table(table, summary, format, &mut buf)?;
            buf.flush().map_err(io(p))?;
            summary.write_text(stdout).map_err(io(Path::new("stdout")))
        }
        None => {
            write_table(table, summary, format, stdout)?;
            summary.write_text(stderr).map_err(io(Path::new("stderr")))
        }
    }
}
