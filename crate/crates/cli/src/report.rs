//! Emitting reports as JSON, CSV or an aligned text table.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use anyhow::Result;
use permfilter::io::write_atomic;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Table,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "table" => Ok(Self::Table),
            other => Err(format!(
                "unknown report format '{other}' (expected json, csv or table)"
            )),
        }
    }
}

/// Column names plus rendered rows.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write_text(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let mut widths: Vec<usize> = self.header.iter().map(String::len).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        writeln!(out, "{}", line(&self.header))?;
        for row in &self.rows {
            writeln!(out, "{}", line(row))?;
        }
        Ok(())
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(&self.header)?;
        for row in &self.rows {
            wtr.write_record(row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Writes `value` (JSON) or `table` (CSV / text) to `out`, or stdout when
/// no path is given. File output is atomic.
pub fn emit<T: Serialize>(
    format: ReportFormat,
    value: &T,
    table: &Table,
    out: Option<&Path>,
) -> Result<()> {
    let render = |w: &mut dyn Write| -> Result<()> {
        match format {
            ReportFormat::Json => {
                serde_json::to_writer_pretty(&mut *w, value)?;
                writeln!(w)?;
            }
            ReportFormat::Csv => table.write_csv(w)?,
            ReportFormat::Table => table.write_text(w)?,
        }
        Ok(())
    };
    match out {
        Some(path) => {
            let mut buf = Vec::new();
            render(&mut buf)?;
            write_atomic(path, |w| Ok(w.write_all(&buf)?))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            render(&mut lock)?;
        }
    }
    Ok(())
}
