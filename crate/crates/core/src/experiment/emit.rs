use std::io::Write;

use super::{Cell, RunReport};
use super::config::Format;
use crate::error::{Error, Result};

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Empty => String::new(),
        Cell::Int(i) => i.to_string(),
        Cell::Num(x) => format!("{x:.16e}"),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

/// CSV of the report table: header row, then one row per entry.
pub fn write_csv<W: Write>(report: &RunReport, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&report.table.columns).map_err(csv_err)?;
    for row in &report.table.rows {
        w.write_record(row.iter().map(cell_text)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(report: &RunReport, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn emit<W: Write>(report: &RunReport, format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(report, out),
        Format::Json => write_json(report, out),
    }
}

pub fn emit_to_vec(report: &RunReport, format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    emit(report, format, &mut buf)?;
    Ok(buf)
}
