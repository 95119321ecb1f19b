//! Stable on-disk formats.
//!
//! Trajectory files are CSV: two `#` comment lines carrying the format
//! version and the resolved run config, then an RFC-4180 body (CRLF line
//! ends, '.' decimal separator, 17 significant digits) whose columns are
//! always `t, x1..xn, v1..vn`. Reports are pretty-printed JSON with a stable
//! key order (struct declaration order, `BTreeMap` for maps) and embed the
//! same version and config. Identical inputs produce identical bytes.
//!
//! All files are written atomically: the bytes land in a temporary file in
//! the target directory which is then renamed over the destination.

use std::io::Write;
use std::path::Path;

use geofil::solver::Trajectory;
use serde::Serialize;

use crate::config::{RunConfig, FORMAT_VERSION};
use crate::Failure;

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn comment_header(config: &RunConfig) -> Result<String, Failure> {
    let echoed = serde_json::to_string(config)
        .map_err(|e| Failure::Io(format!("config serialization: {e}")))?;
    Ok(format!("# format-version: {FORMAT_VERSION}\r\n# config: {echoed}\r\n"))
}

/// Render a trajectory as a CSV file body.
pub fn trajectory_csv(traj: &Trajectory, config: &RunConfig) -> Result<Vec<u8>, Failure> {
    let d = traj.coord_dim;
    let mut out = comment_header(config)?.into_bytes();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.extend((1..=d).map(|i| format!("v{i}")));
    w.write_record(&header).map_err(|e| Failure::Io(e.to_string()))?;
    for s in &traj.samples {
        let mut row = Vec::with_capacity(1 + 2 * d);
        row.push(fmt17(s.t));
        row.extend(s.y.iter().map(|&c| fmt17(c)));
        w.write_record(&row).map_err(|e| Failure::Io(e.to_string()))?;
    }
    out.extend(w.into_inner().map_err(|e| Failure::Io(e.to_string()))?);
    Ok(out)
}

/// Render a table of summary rows as a CSV file body.
pub fn table_csv(
    columns: &[String],
    rows: &[Vec<String>],
    config: &RunConfig,
) -> Result<Vec<u8>, Failure> {
    let mut out = comment_header(config)?.into_bytes();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(columns).map_err(|e| Failure::Io(e.to_string()))?;
    for row in rows {
        w.write_record(row).map_err(|e| Failure::Io(e.to_string()))?;
    }
    out.extend(w.into_inner().map_err(|e| Failure::Io(e.to_string()))?);
    Ok(out)
}

/// Render a report as pretty JSON with a trailing newline.
pub fn report_json<T: Serialize>(report: &T) -> Result<Vec<u8>, Failure> {
    let mut bytes =
        serde_json::to_vec_pretty(report).map_err(|e| Failure::Io(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Write a file atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: &dyn std::fmt::Display| Failure::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io(&e))?;
    tmp.write_all(bytes).map_err(|e| io(&e))?;
    tmp.persist(path).map_err(|e| io(&e))?;
    Ok(())
}

/// Parse the data portion of a trajectory CSV back into rows of numbers.
/// Used by tests and the comparison tooling; skips the comment lines.
pub fn parse_trajectory_csv(bytes: &[u8]) -> Result<(Vec<String>, Vec<Vec<f64>>), Failure> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Failure::Io(format!("trajectory csv is not UTF-8: {e}")))?;
    let data: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let mut r = csv::Reader::from_reader(data.as_bytes());
    let header = r
        .headers()
        .map_err(|e| Failure::Io(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Failure::Io(e.to_string()))?;
        let row: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        rows.push(row.map_err(|e| Failure::Io(format!("bad number in csv: {e}")))?);
    }
    Ok((header, rows))
}
