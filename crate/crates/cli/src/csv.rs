//! Plot-ready CSV: header row, one column per series, 17 significant
//! digits, LF line endings.

use std::fs;
use std::path::Path;

use crate::error::CliError;

/// Formats a value with 17 significant digits.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Renders columns in the given order. Fails on zero columns, zero rows or
/// columns of unequal length.
pub fn render(path: &Path, columns: &[(&str, &[f64])]) -> Result<String, CliError> {
    let rows = columns.first().map_or(0, |c| c.1.len());
    if rows == 0 || columns.iter().any(|c| c.1.len() != rows) {
        return Err(CliError::LengthMismatch {
            path: path.to_path_buf(),
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::io(path, e.into());
    w.write_record(columns.iter().map(|c| c.0)).map_err(io)?;
    for r in 0..rows {
        w.write_record(columns.iter().map(|c| format_value(c.1[r])))
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(path, e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII fields"))
}

pub fn write_series(path: &Path, columns: &[(&str, &[f64])]) -> Result<(), CliError> {
    let text = render(path, columns)?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
