use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn sink(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

/// Writes `rows` as CSV, or `doc` as pretty JSON.
pub fn emit<R: Serialize, D: Serialize + ?Sized>(
    format: Format,
    out: Option<&Path>,
    rows: &[R],
    doc: &D,
) -> io::Result<()> {
    let mut w = sink(out)?;
    match format {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut w);
            for r in rows {
                csv.serialize(r).map_err(io::Error::other)?;
            }
            csv.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, doc).map_err(io::Error::other)?;
            writeln!(w)?;
        }
    }
    w.flush()
}

/// Writes `rows` as CSV, or the same rows as a JSON array.
pub fn emit_rows<R: Serialize>(format: Format, out: Option<&Path>, rows: &[R]) -> io::Result<()> {
    emit(format, out, rows, rows)
}

/// Empirical column for CSV: the rate, or `unreached` when no failure was seen.
pub fn empirical_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "unreached".to_string(), |x| x.to_string())
}
