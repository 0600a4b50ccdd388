//! CSV trajectory logs and JSON summaries.
//!
//! CSV columns: `t, x1..xn, u1..um, e1..em, <weight labels>, E, m_s, beta1`.
//! `E` and `m_s` are blank before the first full window, `beta1` is blank
//! except at the end of each PE window. Numbers use 17 significant digits in
//! exponent notation so a re-read returns the logged `f64` exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::learner::TrajectoryLog;

pub fn csv_header(log: &TrajectoryLog) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=log.n).map(|i| format!("x{i}")));
    h.extend((1..=log.m).map(|i| format!("u{i}")));
    h.extend((1..=log.m).map(|i| format!("e{i}")));
    h.extend(log.weight_labels.iter().cloned());
    h.extend(["E", "m_s", "beta1"].map(String::from));
    h
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn write_csv(log: &TrajectoryLog, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(csv_header(log)).map_err(|e| csv_err(path, e))?;
    let mut row: Vec<String> = Vec::new();
    for r in &log.records {
        row.clear();
        row.push(num(r.t));
        row.extend(r.x.iter().chain(r.u.iter()).chain(r.e.iter()).chain(r.w.iter()).map(|v| num(*v)));
        row.push(opt(r.bellman));
        row.push(opt(r.m_s));
        row.push(opt(r.beta1));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A parsed CSV log: column names and rows with blanks as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<CsvTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let row = rec
            .iter()
            .map(|f| {
                if f.is_empty() {
                    Ok(None)
                } else {
                    f.parse::<f64>().map(Some).map_err(|_| {
                        Error::Config {
                            field: None,
                            line: Some(i + 2),
                            message: format!("{}: `{f}` is not a number", path.display()),
                        }
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::io(path, e.into()))?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_grid_table(report: &super::grid::GridEvalReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let n = report.grid.lo.len();
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.push("value_error".into());
    header.push("policy_error".into());
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for p in &report.points {
        let mut row: Vec<String> = p.x.iter().map(|v| num(*v)).collect();
        row.push(num(p.value_error));
        row.push(num(p.policy_error));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
