//! CSV and JSON emission.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rdars_core::optimizer::TraceRow;
use serde::Serialize;

use crate::error::{Result, SimError};
use crate::harness::{summarize, Beampattern, ExperimentOutput, ExperimentRecord};

#[derive(Serialize)]
struct TraceCsvRow {
    iter: usize,
    radar_snr_db: f64,
    penalized_obj: f64,
    comm_residual: f64,
    selection_residual: f64,
    min_sinr_db: f64,
    rho1: f64,
    rho2: f64,
}

impl From<&TraceRow> for TraceCsvRow {
    fn from(r: &TraceRow) -> Self {
        Self {
            iter: r.iter,
            radar_snr_db: r.radar_snr_db,
            penalized_obj: r.penalized_obj,
            comm_residual: r.comm_residual,
            selection_residual: r.selection_residual,
            min_sinr_db: r.min_sinr_db,
            rho1: r.rho1,
            rho2: r.rho2,
        }
    }
}

pub const RECORD_HEADER: [&str; 10] = [
    "scheme",
    "trial",
    "seed",
    "sweep_value",
    "radar_snr_db",
    "min_sinr_db",
    "comm_residual",
    "selection_residual",
    "iterations",
    "wall_ms",
];

fn csv_bytes<T: Serialize>(header: &[&str], rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| SimError::Csv(e.into_error().into()))
}

/// `records.csv` content; the header is written even with no rows.
pub fn records_csv(records: &[ExperimentRecord]) -> Result<Vec<u8>> {
    csv_bytes(&RECORD_HEADER, records)
}

pub fn trace_csv(rows: &[TraceRow]) -> Result<Vec<u8>> {
    let rows: Vec<TraceCsvRow> = rows.iter().map(TraceCsvRow::from).collect();
    csv_bytes(
        &["iter", "radar_snr_db", "penalized_obj", "comm_residual", "selection_residual", "min_sinr_db", "rho1", "rho2"],
        &rows,
    )
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<PathBuf> {
    let mut f = fs::File::create(&path).map_err(|e| SimError::io(&path, e))?;
    f.write_all(bytes).map_err(|e| SimError::io(&path, e))?;
    Ok(path)
}

fn beampattern_files(dir: &Path, b: &Beampattern) -> Result<Vec<PathBuf>> {
    let tag = format!("{}_{}", b.scheme.name(), b.trial);
    let bs = csv_bytes(&["theta_rad", "gain_db"], &b.bs)?;
    let rd = csv_bytes(&["theta_rad", "psi_rad", "gain_db"], &b.rdars)?;
    Ok(vec![
        write(dir.join(format!("beampattern_bs_{tag}.csv")), &bs)?,
        write(dir.join(format!("beampattern_rdars_{tag}.csv")), &rd)?,
    ])
}

/// Writes every output file into `dir` (created if needed) and returns their paths.
///
/// `records.csv` and the trace, summary and beampattern files depend only on the
/// experiment inputs; wall-clock times go to `timing.csv` unless `timing_in_records`.
pub fn emit_outputs(output: &ExperimentOutput, dir: &Path, timing_in_records: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let mut records = output.records.clone();
    if timing_in_records {
        for r in &mut records {
            r.wall_ms = output
                .timings
                .iter()
                .find(|t| t.scheme == r.scheme && t.trial == r.trial && t.sweep_value == r.sweep_value)
                .map(|t| t.wall_ms);
        }
    }
    let mut files = vec![write(dir.join("records.csv"), &records_csv(&records)?)?];
    files.push(write(dir.join("timing.csv"), &csv_bytes(&["scheme", "trial", "sweep_value", "wall_ms"], &output.timings)?)?);
    files.push(write(dir.join("failures.csv"), &csv_bytes(&["scheme", "trial", "sweep_value", "error"], &output.failures)?)?);
    for t in &output.traces {
        files.push(write(dir.join(format!("trace_{}_{}.csv", t.scheme.name(), t.trial)), &trace_csv(&t.rows)?)?);
    }
    for b in &output.beampatterns {
        files.extend(beampattern_files(dir, b)?);
    }
    let summary = serde_json::to_vec_pretty(&summarize(output.kind, &output.records))?;
    files.push(write(dir.join("summary.json"), &summary)?);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(i: usize) -> ExperimentRecord {
        ExperimentRecord {
            scheme: "rdars-isac".into(),
            trial: i,
            seed: 1,
            sweep_value: 20.0,
            radar_snr_db: Some(3.5),
            min_sinr_db: None,
            comm_residual: Some(1e-12),
            selection_residual: Some(0.0),
            iterations: Some(4),
            wall_ms: None,
        }
    }

    #[test]
    fn empty_records_header_only() {
        let text = String::from_utf8(records_csv(&[]).unwrap()).unwrap();
        assert_eq!(text, format!("{}\n", RECORD_HEADER.join(",")));
    }

    #[test]
    fn thirty_records_thirty_one_lines() {
        let rows: Vec<_> = (0..30).map(record).collect();
        let text = String::from_utf8(records_csv(&rows).unwrap()).unwrap();
        assert_eq!(text.lines().count(), 31);
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().nth(1).unwrap(), "rdars-isac,0,1,20.0,3.5,,1e-12,0.0,4,");
    }
}
