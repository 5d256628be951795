//! File formats: CSV tables written with shortest round-trip float
//! formatting, and constituent events as JSON lines.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::calibrate::CalibrationRecord;
use crate::error::{Error, Result};
use crate::jets::PseudoJet;
use crate::shower::RunRecord;
use crate::splitter::{ScanPoint, SplittingParams};
use crate::stats::Histogram;

fn data_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Data { path: path.to_path_buf(), message: message.into() }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| data_err(path, e.to_string()))
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(open(path)?);
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| data_err(path, format!("row {}: {e}", i + 1))))
        .collect()
}

/// All values of a numeric column, optionally restricted to rows whose
/// `filter` column equals a given integer.
pub fn read_column(path: &Path, column: &str, filter: Option<(&str, i64)>) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let headers = r.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| data_err(path, format!("no column '{name}' in header")))
    };
    let col = find(column)?;
    let filter = filter.map(|(name, v)| find(name).map(|i| (i, v))).transpose()?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if let Some((fc, want)) = filter {
            let got: i64 = rec.get(fc).unwrap_or("").trim().parse().map_err(|_| data_err(path, format!("row {}: bad filter value", i + 1)))?;
            if got != want {
                continue;
            }
        }
        let cell = rec.get(col).unwrap_or("").trim();
        if cell.is_empty() {
            continue;
        }
        let x: f64 = cell.parse().map_err(|_| data_err(path, format!("row {}: '{cell}' is not a number", i + 1)))?;
        out.push(x);
    }
    Ok(out)
}

/// Momentum fractions from a CSV with a `z` or `fraction` column.
pub fn read_z_samples(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let headers = r.headers()?.clone();
    let column = ["z", "fraction"]
        .into_iter()
        .find(|c| headers.iter().any(|h| h.trim() == *c))
        .ok_or_else(|| data_err(path, "expected a 'z' or 'fraction' column"))?;
    read_column(path, column, None)
}

pub fn write_z_samples(path: &Path, zs: &[f64]) -> Result<()> {
    write_rows(path, &["z"], zs.iter().map(|z| (z,)))
}

#[derive(Serialize, Deserialize)]
struct ParamRow {
    z: f64,
    gamma1: f64,
    gamma2: f64,
    gamma3: f64,
    residual_z: f64,
    residual_c: f64,
}

pub const PARAMS_HEADER: [&str; 6] = ["z", "gamma1", "gamma2", "gamma3", "residual_z", "residual_c"];

pub fn write_params(path: &Path, records: &[CalibrationRecord]) -> Result<()> {
    write_rows(
        path,
        &PARAMS_HEADER,
        records.iter().map(|r| ParamRow {
            z: r.z,
            gamma1: r.params.gamma1(),
            gamma2: r.params.gamma2(),
            gamma3: r.params.gamma3(),
            residual_z: r.residual_z,
            residual_c: r.residual_c,
        }),
    )
}

/// Reads a parameter table, checking every row's angle constraint.
pub fn read_params(path: &Path) -> Result<Vec<CalibrationRecord>> {
    read_rows::<ParamRow>(path)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let params = SplittingParams::from_angles(r.gamma1, r.gamma2, r.gamma3)
                .map_err(|e| data_err(path, format!("row {}: {e}", i + 1)))?;
            Ok(CalibrationRecord { z: r.z, params, residual_z: r.residual_z, residual_c: r.residual_c })
        })
        .collect()
}

pub fn run_header(n_prongs: usize) -> Vec<String> {
    let mut h = vec!["run_id".to_string(), "accepted".to_string()];
    h.extend((1..=n_prongs).map(|k| format!("frac{k}")));
    h
}

/// Per-run table; rejected runs keep empty fraction cells.
pub fn write_runs(path: &Path, records: &[RunRecord], n_prongs: usize) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(run_header(n_prongs))?;
    for r in records {
        let fracs: Vec<Option<f64>> = match &r.fractions {
            Some(f) => f.iter().map(|&x| Some(x)).collect(),
            None => vec![None; n_prongs],
        };
        w.serialize((r.run_id, r.fractions.is_some(), fracs))?;
    }
    w.flush()?;
    Ok(())
}

/// A row of the per-run table.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRow {
    pub run_id: u64,
    pub accepted: bool,
    pub fractions: Option<Vec<f64>>,
}

pub fn read_runs(path: &Path) -> Result<Vec<RunRow>> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| data_err(path, format!("row {}: bad {what}", i + 1));
        let run_id = rec.get(0).unwrap_or("").parse().map_err(|_| bad("run_id"))?;
        let accepted: bool = rec.get(1).unwrap_or("").parse().map_err(|_| bad("accepted"))?;
        let fractions = if accepted {
            Some(rec.iter().skip(2).map(|c| c.parse::<f64>().map_err(|_| bad("fraction"))).collect::<Result<Vec<_>>>()?)
        } else {
            None
        };
        out.push(RunRow { run_id, accepted, fractions });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub prong_rank: usize,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: u64,
    pub density: f64,
}

/// One block of rows per histogram; the first histogram is rank 1.
pub fn write_histograms(path: &Path, hists: &[Histogram]) -> Result<()> {
    let rows = hists.iter().enumerate().flat_map(|(k, h)| {
        let d = h.densities();
        (0..h.n_bins()).map(move |i| HistogramRow {
            prong_rank: k + 1,
            bin_lo: h.edges()[i],
            bin_hi: h.edges()[i + 1],
            count: h.counts()[i],
            density: d[i],
        })
    });
    write_rows(path, &["prong_rank", "bin_lo", "bin_hi", "count", "density"], rows)
}

pub fn read_histogram_rows(path: &Path) -> Result<Vec<HistogramRow>> {
    read_rows(path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProngRow {
    pub event_id: u64,
    pub prong_rank: usize,
    pub fraction: f64,
}

pub fn write_prong_fractions(path: &Path, rows: &[ProngRow]) -> Result<()> {
    write_rows(path, &["event_id", "prong_rank", "fraction"], rows)
}

pub fn read_prong_fractions(path: &Path) -> Result<Vec<ProngRow>> {
    read_rows(path)
}

pub fn write_scan(path: &Path, points: &[ScanPoint]) -> Result<()> {
    write_rows(path, &["z_prime", "concurrence_circuit", "concurrence_qcd", "relative_deviation"], points)
}

pub fn read_scan(path: &Path) -> Result<Vec<ScanPoint>> {
    read_rows(path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub points: usize,
    pub max_abs_error: f64,
    pub tolerance: f64,
    pub status: String,
}

pub fn write_checks(path: &Path, rows: &[CheckRow]) -> Result<()> {
    write_rows(path, &["check", "points", "max_abs_error", "tolerance", "status"], rows)
}

pub fn read_checks(path: &Path) -> Result<Vec<CheckRow>> {
    read_rows(path)
}

#[derive(Deserialize)]
struct EventLine {
    constituents: Vec<[f64; 4]>,
}

/// One event per non-blank line: `{"constituents": [[px, py, pz, E], ...]}`.
pub fn read_events(path: &Path) -> Result<Vec<Vec<PseudoJet>>> {
    let reader = BufReader::new(open(path)?);
    let mut events = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ev: EventLine = serde_json::from_str(&line).map_err(|e| data_err(path, format!("line {}: {e}", i + 1)))?;
        events.push(ev.constituents.into_iter().map(PseudoJet::from_array).collect());
    }
    Ok(events)
}

pub fn write_events(path: &Path, events: &[Vec<PseudoJet>]) -> Result<()> {
    let mut f = std::io::BufWriter::new(File::create(path)?);
    for ev in events {
        let constituents: Vec<[f64; 4]> = ev.iter().map(PseudoJet::momentum).collect();
        serde_json::to_writer(&mut f, &serde_json::json!({ "constituents": constituents }))?;
        writeln!(f)?;
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibrate::calibrate_one;

    #[test]
    fn params_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let recs: Vec<_> = [0.61, 0.8, 1.0].iter().map(|&z| calibrate_one(z).unwrap()).collect();
        write_params(&path, &recs).unwrap();
        assert_eq!(read_params(&path).unwrap(), recs);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("z,gamma1,gamma2,gamma3,residual_z,residual_c\n"));
    }

    #[test]
    fn runs_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let recs = vec![
            RunRecord { run_id: 0, fractions: Some(vec![0.5, 0.3, 0.2]), truth: vec![] },
            RunRecord { run_id: 1, fractions: None, truth: vec![] },
        ];
        write_runs(&path, &recs, 3).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "run_id,accepted,frac1,frac2,frac3\n0,true,0.5,0.3,0.2\n1,false,,,\n");
        let rows = read_runs(&path).unwrap();
        assert_eq!(rows[0].fractions, Some(vec![0.5, 0.3, 0.2]));
        assert!(!rows[1].accepted);
    }

    #[test]
    fn events_and_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.jsonl");
        std::fs::write(&path, "{\"constituents\": [[1,0,0,1],[0,2,0,2]]}\n\n{\"constituents\": []}\n").unwrap();
        let ev = read_events(&path).unwrap();
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[0][1].momentum(), [0.0, 2.0, 0.0, 2.0]);
        assert!(ev[1].is_empty());
        std::fs::write(&path, "{\"constituents\": [[1,0]]}\n").unwrap();
        assert!(matches!(read_events(&path), Err(Error::Data { .. })));

        let csv = dir.path().join("f.csv");
        let rows = vec![
            ProngRow { event_id: 0, prong_rank: 1, fraction: 0.7 },
            ProngRow { event_id: 0, prong_rank: 2, fraction: 0.3 },
            ProngRow { event_id: 1, prong_rank: 1, fraction: 0.1 + 0.2 },
        ];
        write_prong_fractions(&csv, &rows).unwrap();
        assert_eq!(read_prong_fractions(&csv).unwrap(), rows);
        assert_eq!(read_column(&csv, "fraction", Some(("prong_rank", 1))).unwrap(), vec![0.7, 0.1 + 0.2]);
        assert_eq!(read_z_samples(&csv).unwrap().len(), 3);
        assert!(read_column(&csv, "nope", None).is_err());
        assert!(matches!(read_z_samples(&dir.path().join("missing.csv")), Err(Error::Data { .. })));
    }
}
