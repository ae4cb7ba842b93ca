//! Deterministic CSV and JSON writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use kicked_holonomy::{CMat2, CVec2, C64};
use serde_json::{json, Value};

use crate::CliError;

/// Floats in CSV cells: 17 significant digits, scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn complex(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn matrix(m: &CMat2) -> Value {
    json!([[complex(m[(0, 0)]), complex(m[(0, 1)])], [complex(m[(1, 0)]), complex(m[(1, 1)])]])
}

pub fn vector(v: &CVec2) -> Value {
    json!([complex(v.0[0]), complex(v.0[1])])
}

/// Destination of the primary artifact: a file when given, stdout otherwise.
pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Config(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Comma-separated table with a mandatory header row.
pub struct CsvTable<W: Write> {
    out: W,
    columns: usize,
}

impl<W: Write> CsvTable<W> {
    pub fn new(mut out: W, header: &[&str]) -> io::Result<Self> {
        writeln!(out, "{}", header.join(","))?;
        Ok(CsvTable { out, columns: header.len() })
    }

    pub fn row(&mut self, cells: &[String]) -> io::Result<()> {
        debug_assert_eq!(cells.len(), self.columns);
        writeln!(self.out, "{}", cells.join(","))
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}

pub fn write_json(mut out: impl Write, value: &Value) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()
}
