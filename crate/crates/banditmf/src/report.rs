//! Plain-text table rendering for metric CSVs.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: file not found")]
    Missing { path: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
}

impl ReportError {
    pub fn is_missing(&self) -> bool {
        matches!(self, ReportError::Missing { .. })
    }
}

/// Renders CSV text as a fixed-width table: each column as wide as its
/// widest cell, cells left-aligned and separated by two spaces, no trailing
/// whitespace.
pub fn render_table(csv_text: &str) -> Result<String, csv::Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(csv_text.as_bytes());
    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        rows.push(record?.iter().map(str::to_string).collect());
    }
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; columns];
    for row in &rows {
        for (col, cell) in row.iter().enumerate() {
            widths[col] = widths[col].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in &rows {
        let mut line = String::new();
        for (col, cell) in row.iter().enumerate() {
            if col > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            if col + 1 < row.len() {
                let pad = widths[col].saturating_sub(cell.chars().count());
                line.push_str(&" ".repeat(pad));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    Ok(out)
}

/// Renders the CSV file at `path` as a fixed-width table.
pub fn render_csv_file(path: &Path) -> Result<String, ReportError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            ReportError::Missing { path: display.clone() }
        } else {
            ReportError::Io { path: display.clone(), source: e }
        }
    })?;
    render_table(&text).map_err(|e| ReportError::Csv { path: display, source: e })
}
