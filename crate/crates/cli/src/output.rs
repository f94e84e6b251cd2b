use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter, Serializer};
use serde_json::Value;

/// Every float is written with 16 significant digits in scientific notation,
/// so output is stable and never rounds below 12 digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.15e}")
    } else {
        String::new()
    }
}

/// Wraps a JSON formatter so floats go through [`fmt_f64`].
struct Precise<F>(F);

impl<F: Formatter> Formatter for Precise<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn write_with<T: Serialize, F: Formatter>(value: &T, f: F) -> io::Result<String> {
    let mut buf = Vec::new();
    value.serialize(&mut Serializer::with_formatter(&mut buf, Precise(f)))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(io::Error::other)
}

pub fn to_json<T: Serialize>(value: &T) -> io::Result<String> {
    write_with(value, PrettyFormatter::new())
}

/// One JSON object per line, floats formatted as in [`to_json`].
pub fn to_json_lines<T: Serialize>(items: &[T]) -> io::Result<String> {
    let mut out = String::new();
    for item in items {
        out.push_str(&write_with(item, CompactFormatter)?);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub enum Cell {
    Text(String),
    Real(f64),
    Int(i64),
    Flag(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Real(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Flag(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
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

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
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

impl From<u32> for Cell {
    fn from(i: u32) -> Self {
        Cell::Int(i as i64)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> io::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let buf = w
            .into_inner()
            .map_err(|e| io::Error::other(e.to_string()))?;
        String::from_utf8(buf).map_err(io::Error::other)
    }
}

/// Two-column series written as a whitespace-separated `.dat` file.
#[derive(Debug, Clone)]
pub struct Plot {
    pub name: &'static str,
    pub columns: [&'static str; 2],
    pub points: Vec<(f64, f64)>,
}

impl Plot {
    pub fn render(&self) -> String {
        let mut s = format!("# {} {}\n", self.columns[0], self.columns[1]);
        for (x, y) in &self.points {
            s.push_str(&format!("{} {}\n", fmt_f64(*x), fmt_f64(*y)));
        }
        s
    }

    /// `run.json` with plot `witness` goes to `run_witness.dat`.
    pub fn path_next_to(&self, out: &Path) -> PathBuf {
        let stem = out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "qlatwit".to_string());
        out.with_file_name(format!("{stem}_{}.dat", self.name))
    }
}

/// Everything one command produces.
#[derive(Debug)]
pub struct Outcome {
    pub config: Value,
    pub results: Value,
    pub table: Table,
    pub plots: Vec<Plot>,
    /// Short lines echoed to stderr in CSV mode, where `results` is not printed.
    pub summary: Vec<String>,
    pub trace: Option<Vec<Value>>,
}

impl Outcome {
    pub fn new(config: Value, results: Value, table: Table) -> Self {
        Self {
            config,
            results,
            table,
            plots: Vec::new(),
            summary: Vec::new(),
            trace: None,
        }
    }
}
