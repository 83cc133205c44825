//! Readers and writers for the on-disk formats.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;
use srsbs_core::detector::DetectionEvent;
use srsbs_core::harness::{ExperimentConfig, Metrics};
use srsbs_core::tag::GoldCodeSet;

use crate::stats::clopper_pearson;
use crate::{Error, Result};

/// One row per code: `code_id,c_1,...,c_N` with entries `1` or `-1`.
pub fn write_codes<W: Write>(codes: &GoldCodeSet, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for (id, code) in codes.iter() {
        let mut row = Vec::with_capacity(code.len() + 1);
        row.push(id.to_string());
        row.extend(code.iter().map(|c| c.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<codes>", e))?;
    Ok(())
}

pub fn read_codes<R: std::io::Read>(input: R) -> Result<Vec<(usize, Vec<i8>)>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |message: String| Error::Parse {
            path: "<codes>".into(),
            line: line + 1,
            message,
        };
        let mut fields = rec.iter();
        let id = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| bad("missing code id".into()))?;
        let chips = fields
            .map(|f| match f.trim() {
                "1" => Ok(1),
                "-1" => Ok(-1),
                other => Err(bad(format!("chip {other:?} is not ±1"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        out.push((id, chips));
    }
    Ok(out)
}

/// One value per line, shortest round-trip decimal form.
pub fn write_trace<W: Write>(trace: &[f64], mut out: W) -> std::io::Result<()> {
    for a in trace {
        writeln!(out, "{a}")?;
    }
    out.flush()
}

pub fn save_trace(path: &Path, trace: &[f64]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace(trace, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Parses a trace; blank lines are skipped.
pub fn read_trace<R: BufRead>(input: R, path: &Path) -> Result<Vec<f64>> {
    let mut trace = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let value: f64 = text.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("{text:?} is not a number"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("{text:?} is not finite"),
            });
        }
        trace.push(value);
    }
    Ok(trace)
}

pub fn load_trace(path: &Path) -> Result<Vec<f64>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_trace(std::io::BufReader::new(file), path)
}

#[derive(Debug, Serialize, serde::Deserialize, PartialEq)]
struct EventRow {
    period_index: usize,
    code_id: usize,
    correlation: f64,
}

pub fn write_events<W: Write>(events: &[DetectionEvent], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    // header even for an empty list
    w.write_record(["period_index", "code_id", "correlation"])?;
    for e in events {
        w.write_record(&[
            e.period_index.to_string(),
            e.code_id.to_string(),
            e.correlation.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<events>", e))?;
    Ok(())
}

pub fn read_events<R: std::io::Read>(input: R) -> Result<Vec<DetectionEvent>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<EventRow>()
        .map(|row| {
            let row = row?;
            Ok(DetectionEvent {
                period_index: row.period_index,
                code_id: row.code_id,
                correlation: row.correlation,
            })
        })
        .collect()
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub parameter_value: String,
    pub detection_probability: f64,
    pub false_alarm_probability: f64,
    pub cross_false_alarm_probability: f64,
    pub n_srs: usize,
    pub seed: u64,
}

impl ResultRow {
    pub fn new(parameter_value: impl Into<String>, metrics: &Metrics, seed: u64) -> Self {
        Self {
            parameter_value: parameter_value.into(),
            detection_probability: metrics.detection_probability,
            false_alarm_probability: metrics.false_alarm_probability,
            cross_false_alarm_probability: metrics.cross_false_alarm_probability,
            n_srs: metrics.n_srs,
            seed,
        }
    }
}

pub const RESULT_HEADER: [&str; 6] = [
    "parameter_value",
    "detection_probability",
    "false_alarm_probability",
    "cross_false_alarm_probability",
    "n_srs",
    "seed",
];

pub fn write_results<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RESULT_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<results>", e))?;
    Ok(())
}

/// Results row plus exact 95 % binomial intervals, for JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct DetailedRow {
    #[serde(flatten)]
    pub row: ResultRow,
    pub messages: usize,
    pub detections: usize,
    pub false_alarms: usize,
    pub cross_false_alarms: usize,
    pub detection_ci95: (f64, f64),
    pub false_alarm_ci95: (f64, f64),
    pub cross_false_alarm_ci95: (f64, f64),
}

impl DetailedRow {
    pub fn new(row: ResultRow, metrics: &Metrics) -> Self {
        let ci = |k| clopper_pearson(k, metrics.messages, 0.05);
        Self {
            row,
            messages: metrics.messages,
            detections: metrics.detections,
            false_alarms: metrics.false_alarms,
            cross_false_alarms: metrics.cross_false_alarms,
            detection_ci95: ci(metrics.detections),
            false_alarm_ci95: ci(metrics.false_alarms),
            cross_false_alarm_ci95: ci(metrics.cross_false_alarms),
        }
    }
}

/// Record of a CLI run: what ran, with which fully resolved configuration.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: config.clone(),
            sweep: None,
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
