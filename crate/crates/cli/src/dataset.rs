//! CSV ingestion.

use std::path::Path;

use adp_core::Dataset;

use crate::error::{CliError, CliResult};

/// Reads a headed CSV file of decimal values.
pub fn load_csv(path: &Path) -> CliResult<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let names: Vec<String> = reader.headers().map_err(|e| csv_error(path, e))?.iter().map(str::to_string).collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(CliError::EmptyFile(path.to_path_buf()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(rows.len() as u64 + 2, |p| p.line());
        let mut row = Vec::with_capacity(names.len());
        for (cell, column) in record.iter().zip(&names) {
            let value: f64 = cell.parse().map_err(|_| CliError::Parse {
                row: line,
                column: column.clone(),
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(CliError::Parse { row: line, column: column.clone(), value: cell.to_string() });
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::EmptyFile(path.to_path_buf()));
    }
    Ok(Dataset::new(rows, names)?)
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if let csv::ErrorKind::Io(io) = e.kind() {
        return CliError::Io { path: path.to_path_buf(), message: io.to_string() };
    }
    CliError::Csv { path: path.to_path_buf(), message: e.to_string() }
}
