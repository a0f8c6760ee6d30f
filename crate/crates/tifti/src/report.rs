//! Prediction files and evaluation reports.
//!
//! Agreement values over an empty true-positive set are written as `n/a`.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use tifti_core::cascade::{DecodedDoc, Evidence, Method, PredictionDetail};
use tifti_core::corpus::PatientDrugExample;
use tifti_core::eval::{EvalReport, MethodResult};

use crate::error::{Error, Result};

pub const NA: &str = "n/a";
pub const SUMMARY_HEADER: [&str; 8] = ["method", "f1", "precision", "recall", "start_0", "stop_0", "start_30", "stop_30"];
pub const AGREEMENT_HEADER: [&str; 4] = ["method", "t", "start_agreement", "stop_agreement"];

#[derive(Debug, Serialize)]
struct PredictionRecord<'a> {
    patient_id: &'a str,
    drug: &'a str,
    method: &'static str,
    taken: bool,
    start: Option<String>,
    end: Option<String>,
    start_evidence: Option<&'static str>,
    end_evidence: Option<&'static str>,
    decoded: Vec<DecodedRecord>,
}

#[derive(Debug, Serialize)]
struct DecodedRecord {
    timestamp: String,
    label: &'static str,
    pseudo: bool,
}

impl From<&DecodedDoc> for DecodedRecord {
    fn from(d: &DecodedDoc) -> Self {
        DecodedRecord { timestamp: d.timestamp.to_string(), label: d.label.name(), pseudo: d.is_pseudo }
    }
}

/// One JSON line: the interval, its evidence, and the decoded label of every
/// timeline entry.
pub fn prediction_json(example: &PatientDrugExample, method: Method, detail: &PredictionDetail) -> String {
    let p = &detail.interval;
    let record = PredictionRecord {
        patient_id: &example.patient_id,
        drug: &example.drug.canonical_name,
        method: method.name(),
        taken: p.taken,
        start: p.start.map(|d| d.to_string()),
        end: p.end.map(|d| d.to_string()),
        start_evidence: p.start_evidence.map(Evidence::name),
        end_evidence: p.end_evidence.map(Evidence::name),
        decoded: detail.decoded.iter().map(DecodedRecord::from).collect(),
    };
    serde_json::to_string(&record).expect("record serializes")
}

pub fn write_predictions(
    path: &Path,
    examples: &[PatientDrugExample],
    method: Method,
    preds: &[PredictionDetail],
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (ex, p) in examples.iter().zip(preds) {
        writeln!(w, "{}", prediction_json(ex, method, p)).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn ratio(x: f64) -> String {
    format!("{x:.6}")
}

fn opt_ratio(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), ratio)
}

fn percent(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), |v| format!("{:.1}%", 100.0 * v))
}

fn summary_row(method: Method, r: &EvalReport) -> [String; 8] {
    [
        method.name().to_string(),
        ratio(r.f1),
        ratio(r.precision),
        ratio(r.recall),
        opt_ratio(r.start_at(0)),
        opt_ratio(r.stop_at(0)),
        opt_ratio(r.start_at(30)),
        opt_ratio(r.stop_at(30)),
    ]
}

/// Aligned table with F1, Start(0), Stop(0), Start(30), Stop(30).
pub fn render_table(rows: &[MethodResult]) -> String {
    let header = ["Method", "F1", "Start(0)", "Stop(0)", "Start(30)", "Stop(30)"].map(String::from);
    let mut table = vec![header];
    for m in rows {
        let r = &m.report;
        table.push([
            m.method.name().to_string(),
            format!("{:.3}", r.f1),
            percent(r.start_at(0)),
            percent(r.stop_at(0)),
            percent(r.start_at(30)),
            percent(r.stop_at(30)),
        ]);
    }
    let mut widths = [0usize; 6];
    for row in &table {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    table.insert(1, widths.map(|w| "-".repeat(w)));
    let mut out = String::new();
    for row in &table {
        let cells: Vec<String> = row
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  "));
    }
    out
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_summary_csv(path: &Path, rows: &[MethodResult]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for m in rows {
        w.write_record(summary_row(m.method, &m.report))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_agreement_csv(path: &Path, rows: &[MethodResult]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(AGREEMENT_HEADER)?;
    for m in rows {
        for a in &m.report.agreement {
            w.write_record([m.method.name().to_string(), a.t.to_string(), opt_ratio(a.start), opt_ratio(a.stop)])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `table.txt`, `summary.csv` and `agreement.csv` into `dir`.
pub fn write_report_dir(dir: &Path, rows: &[MethodResult]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let table = dir.join("table.txt");
    fs::write(&table, render_table(rows)).map_err(|e| Error::io(&table, e))?;
    write_summary_csv(&dir.join("summary.csv"), rows)?;
    write_agreement_csv(&dir.join("agreement.csv"), rows)
}
