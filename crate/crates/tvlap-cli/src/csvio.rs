//! Minimal CSV reading and writing for the numeric tables this tool
//! exchanges: a mandatory header row, comma separators, no quoting, and
//! 17-significant-digit numbers so files round-trip and reproduce
//! byte-identically.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::config::{CliError, CliResult};

/// A parsed numeric CSV: named columns of equal length.
#[derive(Debug)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(CliError::usage(format!("{}: empty file", path.display())));
    };
    let headers: Vec<String> = header.split(',').map(|h| h.trim().to_string()).collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != headers.len() {
            return Err(CliError::usage(format!(
                "{}:{}: expected {} fields, got {}",
                path.display(),
                idx + 1,
                headers.len(),
                fields.len()
            )));
        }
        for (col, field) in fields.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| {
                CliError::usage(format!(
                    "{}:{}: cannot parse {:?} in column {}",
                    path.display(),
                    idx + 1,
                    field,
                    headers[col]
                ))
            })?;
            columns[col].push(value);
        }
    }
    Ok(Table { headers, columns })
}

/// Requires a strictly increasing time column.
pub fn check_monotone_time(time: &[f64], path: &Path) -> CliResult<()> {
    for (i, w) in time.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(CliError::usage(format!(
                "{}: time is not strictly increasing at data row {}",
                path.display(),
                i + 2
            )));
        }
    }
    Ok(())
}

/// 17 significant digits: round-trips every f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Row-oriented CSV writer.
pub struct CsvWriter {
    out: BufWriter<File>,
}

impl CsvWriter {
    pub fn create(path: &Path, headers: &[&str]) -> CliResult<Self> {
        crate::config::check_writable(path)?;
        let file = File::create(path)
            .map_err(|e| CliError::usage(format!("cannot create {}: {e}", path.display())))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{}", headers.join(","))
            .map_err(|e| CliError::usage(format!("write failed: {e}")))?;
        Ok(Self { out })
    }

    pub fn row(&mut self, fields: &[String]) -> CliResult<()> {
        writeln!(self.out, "{}", fields.join(","))
            .map_err(|e| CliError::usage(format!("write failed: {e}")))
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.out
            .flush()
            .map_err(|e| CliError::usage(format!("write failed: {e}")))
    }
}
