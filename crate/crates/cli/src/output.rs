//! Tabular output shared by every subcommand.
//!
//! CSV is a header row followed by records; the summary goes on a final
//! `# key=value,...` comment line. JSON is a single object
//! `{"records": [...], "summary": {...}}` whose record keys equal the CSV
//! headers. Numbers are written as decimal strings from the caller and
//! embedded in JSON verbatim, so no digits are lost to `f64`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Number, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One output cell.
#[derive(Clone, Debug)]
pub enum Cell {
    /// A decimal number, already formatted.
    Num(String),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv_text(&self) -> String {
        match self {
            Cell::Num(s) | Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(s) => s
                .parse::<Number>()
                .map(Value::Number)
                .unwrap_or_else(|_| Value::String(s.clone())),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

pub fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

enum Sink {
    Csv(csv::Writer<Box<dyn Write>>),
    Json { out: Box<dyn Write>, rows: usize },
}

/// Streams records in either format.
pub struct Table {
    headers: Vec<&'static str>,
    sink: Sink,
}

impl Table {
    pub fn new(format: Format, out: Box<dyn Write>, headers: &[&'static str]) -> io::Result<Self> {
        let sink = match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(out);
                w.write_record(headers)?;
                Sink::Csv(w)
            }
            Format::Json => {
                let mut out = out;
                out.write_all(b"{\"records\":[")?;
                Sink::Json { out, rows: 0 }
            }
        };
        Ok(Table {
            headers: headers.to_vec(),
            sink,
        })
    }

    pub fn row(&mut self, cells: &[Cell]) -> io::Result<()> {
        debug_assert_eq!(cells.len(), self.headers.len());
        match &mut self.sink {
            Sink::Csv(w) => {
                w.write_record(cells.iter().map(Cell::csv_text))?;
            }
            Sink::Json { out, rows } => {
                let record: Map<String, Value> = self
                    .headers
                    .iter()
                    .zip(cells)
                    .map(|(h, c)| (h.to_string(), c.json()))
                    .collect();
                out.write_all(if *rows == 0 { b"\n" } else { b",\n" })?;
                serde_json::to_writer(&mut *out, &record)?;
                *rows += 1;
            }
        }
        Ok(())
    }

    pub fn finish(self, summary: &[(&str, Cell)]) -> io::Result<()> {
        match self.sink {
            Sink::Csv(mut w) => {
                w.flush()?;
                let line = summary
                    .iter()
                    .map(|(k, v)| format!("{k}={}", v.csv_text()))
                    .collect::<Vec<_>>()
                    .join(",");
                let mut out = w.into_inner().map_err(|e| e.into_error())?;
                writeln!(out, "# {line}")?;
                out.flush()
            }
            Sink::Json { mut out, .. } => {
                let obj: Map<String, Value> = summary
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.json()))
                    .collect();
                out.write_all(b"\n],\n\"summary\":")?;
                serde_json::to_writer(&mut out, &obj)?;
                out.write_all(b"}\n")?;
                out.flush()
            }
        }
    }
}
