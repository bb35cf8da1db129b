//! CSV and JSON emission. Floats are written in shortest round-trip form in
//! both encodings, so the two carry identical values.

use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A report with a flat tabular view for CSV.
pub trait Tabular {
    type Row: Serialize;
    const HEADER: &'static [&'static str];
    fn rows(&self) -> Vec<Self::Row>;
}

pub fn write_report<T, W>(report: &T, format: Format, out: W) -> anyhow::Result<()>
where
    T: Serialize + Tabular,
    W: Write,
{
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
            out.flush()?;
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(T::HEADER)?;
            for row in report.rows() {
                w.serialize(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
