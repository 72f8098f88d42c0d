//! Rendering of results as JSON, CSV or human-readable text.

use std::fs;
use std::io::Write;

use eigbound::numfmt::format_f64;

use crate::args::Output;
use crate::CliError;

/// Aligned two-column table.
pub fn table(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("  {k:<width$}  {v}\n"))
        .collect()
}

/// Single-header CSV from string cells.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(row).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Solver(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Solver(e.to_string()))
}

fn io_err(e: csv::Error) -> CliError {
    CliError::Solver(format!("I/O error: {e}"))
}

pub fn num(x: f64) -> String {
    format_f64(x)
}

pub fn opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

/// Writes `text` to `--out` or stdout.
pub fn emit(output: &Output, text: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Solver(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Solver(format!("cannot write to stdout: {e}")))
        }
    }
}
