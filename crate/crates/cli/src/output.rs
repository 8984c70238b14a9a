//! CSV and JSON emission with fixed float formatting.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::{OutputFormat, SweepConfig};
use crate::error::{CliError, Result};
use crate::sweep::{Peak, SkippedSample, SweepOutcome, SweepRecord};

/// Version of the JSON document layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Fixed CSV header of sweep records.
pub const CSV_HEADER: [&str; 7] = ["kappa", "Q_E", "Q_H", "re_moment", "im_moment", "grid_size", "status"];

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn csv_writer<W: Write>(sink: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink)
}

/// Writes rows under a header as LF-terminated CSV.
pub fn write_rows<W: Write>(sink: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut writer = csv_writer(sink);
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush().map_err(|source| CliError::Io {
        path: "<output>".to_string(),
        source,
    })?;
    Ok(())
}

fn record_row(record: &SweepRecord) -> Vec<String> {
    vec![
        format_float(record.kappa),
        format_float(record.q_e),
        format_float(record.q_h),
        format_float(record.re_moment),
        format_float(record.im_moment),
        record.grid_size.to_string(),
        record.status.clone(),
    ]
}

/// Sweep records as CSV.
pub fn write_csv<W: Write>(sink: W, records: &[SweepRecord]) -> Result<()> {
    let rows: Vec<Vec<String>> = records.iter().map(record_row).collect();
    write_rows(sink, &CSV_HEADER, &rows)
}

#[derive(Serialize)]
struct Document<'a> {
    schema_version: u32,
    config: &'a SweepConfig,
    records: &'a [SweepRecord],
    skipped: &'a [SkippedSample],
    peaks: &'a [Peak],
}

/// The whole sweep outcome as one JSON document.
pub fn write_json<W: Write>(mut sink: W, outcome: &SweepOutcome) -> Result<()> {
    let document = Document {
        schema_version: SCHEMA_VERSION,
        config: &outcome.config,
        records: &outcome.records,
        skipped: &outcome.skipped,
        peaks: &outcome.peaks,
    };
    serde_json::to_writer_pretty(&mut sink, &document)?;
    writeln!(sink).map_err(|source| CliError::Io {
        path: "<output>".to_string(),
        source,
    })?;
    Ok(())
}

/// Opens `path`, or standard output when absent.
pub fn open_sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(path) => {
            let file = File::create(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

/// Emits a sweep in the configured format.
pub fn emit_sweep(outcome: &SweepOutcome, format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let sink = open_sink(path)?;
    match format {
        OutputFormat::Csv => write_csv(sink, &outcome.records),
        OutputFormat::Json => write_json(sink, outcome),
    }
}
