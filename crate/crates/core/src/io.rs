//! CSV persistence. Numbers use the shortest round-tripping decimal form
//! with a `.` separator and records end in `\n`, independent of locale.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::integrator::{SimulationTrace, TraceRow};
use crate::material::{SafeSetGrid, TensileSample};

pub const TRACE_HEADER: [&str; 11] = [
    "t",
    "lambda_theta",
    "lambda_z",
    "dlambda_theta",
    "dlambda_z",
    "u_nom_pa",
    "u_safe_pa",
    "h_j_per_m3",
    "psi1",
    "w_j_per_m3",
    "active",
];
pub const PRESSURE_HEADER: [&str; 2] = ["t", "pressure_pa"];
pub const TENSILE_HEADER: [&str; 2] = ["stretch", "stress_pa"];
pub const SAFESET_HEADER: [&str; 3] = ["lambda_theta", "lambda_z", "h_j_per_m3"];

#[derive(Serialize, Deserialize)]
struct TraceRecord {
    t: f64,
    lambda_theta: f64,
    lambda_z: f64,
    dlambda_theta: f64,
    dlambda_z: f64,
    u_nom_pa: f64,
    u_safe_pa: f64,
    h_j_per_m3: f64,
    psi1: f64,
    w_j_per_m3: f64,
    active: u8,
}

impl From<&TraceRow> for TraceRecord {
    fn from(r: &TraceRow) -> Self {
        TraceRecord {
            t: r.t,
            lambda_theta: r.lambda_theta,
            lambda_z: r.lambda_z,
            dlambda_theta: r.dlambda_theta,
            dlambda_z: r.dlambda_z,
            u_nom_pa: r.u_nom,
            u_safe_pa: r.u_safe,
            h_j_per_m3: r.h,
            psi1: r.psi1,
            w_j_per_m3: r.w,
            active: r.active as u8,
        }
    }
}

impl From<TraceRecord> for TraceRow {
    fn from(r: TraceRecord) -> Self {
        TraceRow {
            t: r.t,
            lambda_theta: r.lambda_theta,
            lambda_z: r.lambda_z,
            dlambda_theta: r.dlambda_theta,
            dlambda_z: r.dlambda_z,
            u_nom: r.u_nom_pa,
            u_safe: r.u_safe_pa,
            h: r.h_j_per_m3,
            psi1: r.psi1,
            w: r.w_j_per_m3,
            active: r.active != 0,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PressureRecord {
    t: f64,
    pressure_pa: f64,
}

#[derive(Serialize)]
struct SafeSetRecord {
    lambda_theta: f64,
    lambda_z: f64,
    h_j_per_m3: f64,
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn csv_error(file: &Path, e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Csv {
        file: file.to_path_buf(),
        message: e.to_string(),
    }
}

fn open(file: &Path) -> Result<File, ConfigError> {
    File::open(file).map_err(|source| ConfigError::Io {
        file: file.to_path_buf(),
        source,
    })
}

fn create(file: &Path) -> Result<File, ConfigError> {
    File::create(file).map_err(|source| ConfigError::Io {
        file: file.to_path_buf(),
        source,
    })
}

fn read_records<T: for<'de> Deserialize<'de>>(file: &Path, header: &[&str]) -> Result<Vec<T>, ConfigError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(file)?);
    let found: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(file, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if found != header {
        return Err(csv_error(
            file,
            format!("expected header `{}`, found `{}`", header.join(","), found.join(",")),
        ));
    }
    rdr.deserialize()
        .enumerate()
        .map(|(i, rec)| rec.map_err(|e| csv_error(file, format!("data row {}: {e}", i + 1))))
        .collect()
}

pub fn write_trace_to<W: Write>(out: W, trace: &SimulationTrace) -> csv::Result<()> {
    let mut w = writer(out);
    if trace.rows.is_empty() {
        w.write_record(TRACE_HEADER)?;
    }
    for r in &trace.rows {
        w.serialize(TraceRecord::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(file: &Path, trace: &SimulationTrace) -> Result<(), ConfigError> {
    write_trace_to(create(file)?, trace).map_err(|e| csv_error(file, e))
}

pub fn read_trace(file: &Path) -> Result<SimulationTrace, ConfigError> {
    let records: Vec<TraceRecord> = read_records(file, &TRACE_HEADER)?;
    Ok(SimulationTrace {
        rows: records.into_iter().map(TraceRow::from).collect(),
        ..SimulationTrace::default()
    })
}

pub fn write_pressure(file: &Path, samples: &[(f64, f64)]) -> Result<(), ConfigError> {
    let mut w = writer(create(file)?);
    let result = (|| {
        if samples.is_empty() {
            w.write_record(PRESSURE_HEADER)?;
        }
        for &(t, pressure_pa) in samples {
            w.serialize(PressureRecord { t, pressure_pa })?;
        }
        w.flush()?;
        Ok::<_, csv::Error>(())
    })();
    result.map_err(|e| csv_error(file, e))
}

pub fn read_pressure_csv(file: &Path) -> Result<Vec<(f64, f64)>, ConfigError> {
    let records: Vec<PressureRecord> = read_records(file, &PRESSURE_HEADER)?;
    Ok(records.into_iter().map(|r| (r.t, r.pressure_pa)).collect())
}

pub fn read_tensile_csv(file: &Path) -> Result<Vec<TensileSample>, ConfigError> {
    read_records(file, &TENSILE_HEADER)
}

/// Grid nodes in row-major order, `λθ` outer.
pub fn write_safeset(file: &Path, grid: &SafeSetGrid) -> Result<(), ConfigError> {
    let mut w = writer(create(file)?);
    let result = (|| {
        for (i, &lambda_theta) in grid.theta_axis.iter().enumerate() {
            for (j, &lambda_z) in grid.z_axis.iter().enumerate() {
                w.serialize(SafeSetRecord {
                    lambda_theta,
                    lambda_z,
                    h_j_per_m3: grid.h_values[i][j],
                })?;
            }
        }
        w.flush()?;
        Ok::<_, csv::Error>(())
    })();
    result.map_err(|e| csv_error(file, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> TraceRow {
        TraceRow {
            t,
            lambda_theta: 1.0 + t,
            lambda_z: 1.0,
            dlambda_theta: 1e-300,
            dlambda_z: -0.1,
            u_nom: 10_000.0 / 3.0,
            u_safe: 0.1 + 0.2,
            h: 7900.0,
            psi1: f64::MIN_POSITIVE,
            w: 0.0,
            active: t > 0.0,
        }
    }

    #[test]
    fn trace_header_and_line_endings() {
        let trace = SimulationTrace {
            rows: vec![row(0.0), row(1e-4)],
            ..SimulationTrace::default()
        };
        let mut buf = Vec::new();
        write_trace_to(&mut buf, &trace).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(&(TRACE_HEADER.join(",") + "\n")));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn trace_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("trace.csv");
        let trace = SimulationTrace {
            rows: vec![row(0.0), row(1e-4), row(0.3)],
            ..SimulationTrace::default()
        };
        write_trace(&file, &trace).unwrap();
        assert_eq!(read_trace(&file).unwrap(), trace);
    }

    #[test]
    fn pressure_header_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p.csv");
        std::fs::write(&file, "time,p\n0,1\n").unwrap();
        let err = read_pressure_csv(&file).unwrap_err().to_string();
        assert!(err.contains("t,pressure_pa"), "{err}");
        std::fs::write(&file, "t,pressure_pa\n0,1\n0.5,abc\n").unwrap();
        let err = read_pressure_csv(&file).unwrap_err().to_string();
        assert!(err.contains("data row 2"), "{err}");
        std::fs::write(&file, "t,pressure_pa\n0,1\n0.5,2.5\n").unwrap();
        assert_eq!(read_pressure_csv(&file).unwrap(), vec![(0.0, 1.0), (0.5, 2.5)]);
    }
}
