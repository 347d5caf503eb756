//! Tables written as CSV (17 significant digits) or as a JSON array of row
//! objects.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};

use crate::config::Format;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::String(s.clone()),
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
        Cell::Text(s.to_owned())
    }
}

/// Scientific notation with 17 significant digits, enough to round-trip
/// every `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
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

    pub fn write_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .zip(row)
                        .map(|(k, c)| ((*k).to_owned(), c.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn write(&self, format: Format, w: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &self.to_json())?;
                writeln!(w)
            }
        }
    }
}

/// Where results go: a file (created up front so an unwritable path fails
/// before any computation) or stdout.
pub struct Sink {
    path: Option<PathBuf>,
    writer: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            Some(p) => {
                let file = File::create(p).map_err(|source| CliError::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                Ok(Self {
                    path: Some(p.to_path_buf()),
                    writer: Box::new(BufWriter::new(file)),
                })
            }
            None => Ok(Self {
                path: None,
                writer: Box::new(BufWriter::new(io::stdout())),
            }),
        }
    }

    pub fn emit(
        &mut self,
        f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
    ) -> Result<(), CliError> {
        f(&mut self.writer)
            .and_then(|_| self.writer.flush())
            .map_err(|source| CliError::Io {
                path: self
                    .path
                    .clone()
                    .unwrap_or_else(|| PathBuf::from("<stdout>")),
                source,
            })
    }
}
