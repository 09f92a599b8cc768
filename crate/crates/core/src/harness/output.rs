//! CSV output with a fixed column order.

use std::io::Write;
use std::path::Path;

use super::experiment::ResultRow;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "sweep_var",
    "sweep_value",
    "scheme",
    "strategy",
    "mean_maxmin",
    "mean_sum",
    "stderr_maxmin",
    "stderr_sum",
    "n_trials",
    "n_failures",
];

/// Nine significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    format!("{v:.8e}")
}

fn record(row: &ResultRow) -> [String; 10] {
    [
        row.sweep_var.to_string(),
        format_float(row.sweep_value),
        row.scheme.to_string(),
        row.strategy.to_string(),
        format_float(row.mean_maxmin),
        format_float(row.mean_sum),
        format_float(row.stderr_maxmin),
        format_float(row.stderr_sum),
        row.n_trials.to_string(),
        row.n_failures.to_string(),
    ]
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(record(row))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `rows` to `path`, replacing any existing file.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("refusing to write an empty table".into()));
    }
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(rows, std::io::BufWriter::new(file)).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}
