//! Result records and their CSV / JSON-lines serialization.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{MsaError, Result};
use crate::stats::{ProbEstimate, Status};

use super::config::OutputFormat;

/// Column order of the CSV output.
pub const CSV_COLUMNS: [&str; 14] =
    ["experiment", "seed", "L", "L2", "g", "m", "E", "r", "n", "p_hat", "ci_low", "ci_high", "bound_value", "status"];

/// Echo of the parameters that distinguish records of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(rename = "L")]
    pub l: Option<u64>,
    #[serde(rename = "L2")]
    pub l2: Option<u64>,
    pub g: f64,
    pub m: Option<f64>,
    #[serde(rename = "E")]
    pub e: Option<f64>,
    pub r: Option<f64>,
    /// Anything else worth echoing (times, event names, ...).
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub extra: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    /// Seconds since the Unix epoch.
    pub timestamp: String,
    pub seed: u64,
    pub parameters: Parameters,
    pub n: Option<u64>,
    pub p_hat: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub bound_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub witnesses: Value,
    pub status: Status,
}

fn now() -> String {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_default()
}

impl ResultRecord {
    pub fn new(experiment: &str, seed: u64, parameters: Parameters) -> Self {
        Self {
            experiment: experiment.to_string(),
            timestamp: now(),
            seed,
            parameters,
            n: None,
            p_hat: None,
            ci_low: None,
            ci_high: None,
            bound_value: None,
            witnesses: Value::Null,
            status: Status::Ok,
        }
    }

    pub fn with_estimate(mut self, est: &ProbEstimate) -> Self {
        self.n = Some(est.n);
        self.p_hat = Some(est.p_hat);
        self.ci_low = Some(est.ci_low);
        self.ci_high = Some(est.ci_high);
        self.bound_value = est.bound_value();
        self.status = est.status;
        self
    }

    pub fn with_witnesses(mut self, witnesses: Value) -> Self {
        self.witnesses = witnesses;
        self
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    /// Copy with the timestamp blanked, for comparing runs.
    pub fn without_timestamp(&self) -> Self {
        Self { timestamp: String::new(), ..self.clone() }
    }

    /// Every numeric field must be finite.
    pub fn validate(&self) -> Result<()> {
        let p = &self.parameters;
        let fields = [
            ("g", Some(p.g)),
            ("m", p.m),
            ("E", p.e),
            ("r", p.r),
            ("p_hat", self.p_hat),
            ("ci_low", self.ci_low),
            ("ci_high", self.ci_high),
            ("bound_value", self.bound_value),
        ];
        for (name, v) in fields {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(MsaError::InvalidParameter(format!(
                        "{}: field {name} is not finite ({v})",
                        self.experiment
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn csv_row(r: &ResultRecord) -> [String; 14] {
    let p = &r.parameters;
    [
        r.experiment.clone(),
        r.seed.to_string(),
        opt(p.l, |v| v.to_string()),
        opt(p.l2, |v| v.to_string()),
        format_float(p.g),
        opt(p.m, format_float),
        opt(p.e, format_float),
        opt(p.r, format_float),
        opt(r.n, |v| v.to_string()),
        opt(r.p_hat, format_float),
        opt(r.ci_low, format_float),
        opt(r.ci_high, format_float),
        opt(r.bound_value, format_float),
        r.status.as_str().to_string(),
    ]
}

fn csv_err(e: csv::Error) -> MsaError {
    MsaError::Io { path: "<csv>".into(), message: e.to_string() }
}

pub fn write_csv<W: Write>(records: &[ResultRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in records {
        out.write_record(csv_row(r)).map_err(csv_err)?;
    }
    out.flush().map_err(|e| MsaError::Io { path: "<csv>".into(), message: e.to_string() })
}

pub fn write_jsonl<W: Write>(records: &[ResultRecord], mut w: W) -> Result<()> {
    let io = |e: std::io::Error| MsaError::Io { path: "<jsonl>".into(), message: e.to_string() };
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| MsaError::InvalidParameter(e.to_string()))?;
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_jsonl(text: &str) -> Result<Vec<ResultRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| MsaError::Config(e.to_string())))
        .collect()
}

pub fn write_results<W: Write>(records: &[ResultRecord], format: OutputFormat, w: W) -> Result<()> {
    for r in records {
        r.validate()?;
    }
    match format {
        OutputFormat::Csv => write_csv(records, w),
        OutputFormat::JsonLines => write_jsonl(records, w),
    }
}

/// Writes `records` to `path`, replacing any existing file.
pub fn emit_results(records: &[ResultRecord], format: OutputFormat, path: &Path) -> Result<()> {
    let with_path = |e: MsaError| match e {
        MsaError::Io { message, .. } => MsaError::Io { path: path.display().to_string(), message },
        other => other,
    };
    let file = std::fs::File::create(path)
        .map_err(|e| MsaError::Io { path: path.display().to_string(), message: e.to_string() })?;
    write_results(records, format, std::io::BufWriter::new(file)).map_err(with_path)
}
