//! Runs a named experiment and writes it as CSV and JSON.

use std::io;

use qbx_core::harness::experiments::{sweep, ExperimentId, Overrides};
use qbx_core::harness::report::Format;

fn main() -> qbx_core::Result<()> {
    let id: ExperimentId = "helmholtz_desk".parse()?;
    let report = sweep(id, &Overrides { p: Some(4.0), ..Default::default() })?;
    report.write(Format::Csv, io::stdout().lock())?;

    let small = sweep(ExperimentId::FigPatch, &Overrides { n: Some(24), p: Some(3.0), ..Default::default() })?;
    let json = small.to_json();
    println!("{} rows, meta keys: {:?}", json["rows"].as_array().map_or(0, Vec::len), json["meta"].as_object().map(|m| m.keys().collect::<Vec<_>>()));
    Ok(())
}
