// SPDX-License-Identifier: Apache-2.0

//! Row tables rendered as CSV, markdown or JSON lines.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Markdown,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    /// Value and the number of decimals printed in text formats.
    Float(f64, usize),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    pub fn uint(v: impl TryInto<i64>) -> Cell {
        v.try_into().map(Cell::Int).unwrap_or(Cell::Empty)
    }

    pub fn opt_float(v: Option<f64>, decimals: usize) -> Cell {
        v.map_or(Cell::Empty, |v| Cell::Float(v, decimals))
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v, d) => format!("{v:.d$}", d = *d),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v, _) => Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Markdown => self.write_markdown(out),
            Format::Jsonl => self.write_jsonl(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_markdown(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "| {} |", self.header.join(" | "))?;
        let rule: Vec<&str> = self.header.iter().map(|_| "---").collect();
        writeln!(out, "|{}|", rule.join("|"))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(out, "| {} |", cells.join(" | "))?;
        }
        Ok(())
    }

    fn write_jsonl(&self, out: &mut dyn Write) -> Result<()> {
        for row in &self.rows {
            let obj: Map<String, Value> = self
                .header
                .iter()
                .cloned()
                .zip(row.iter().map(Cell::json))
                .collect();
            serde_json::to_writer(&mut *out, &obj)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Writes to `path`, or to stdout when it is `None`.
pub fn emit(table: &Table, format: Format, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => write_file(p, |w| table.write(format, w)),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write(format, &mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush()
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
