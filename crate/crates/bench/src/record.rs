//! One benchmark record per (mode, sweep time, dephasing, observable).

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::Mode;
use crate::error::{BenchError, Result};

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 18] = [
    "mode",
    "T_ad",
    "T",
    "T_d",
    "observable",
    "value",
    "exact",
    "abs_error",
    "eps_fwd",
    "eps_bwd",
    "delta",
    "bound",
    "runtime_ms",
    "dephasing",
    "status",
    "config_hash",
    "seed",
    "dt",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub mode: Mode,
    #[serde(rename = "T_ad")]
    pub t_ad: f64,
    /// Total sweep time: `T_ad` for QAA, `2 T_ad` for AEV. Dephasing time is
    /// not included.
    #[serde(rename = "T")]
    pub t: f64,
    /// Dephasing time scale; `inf` for ideal dephasing, `0` for none, empty
    /// for QAA.
    #[serde(rename = "T_d", with = "opt_float")]
    pub t_d: Option<f64>,
    pub observable: String,
    #[serde(with = "opt_float")]
    pub value: Option<f64>,
    #[serde(with = "opt_float")]
    pub exact: Option<f64>,
    #[serde(with = "opt_float")]
    pub abs_error: Option<f64>,
    #[serde(with = "opt_float")]
    pub eps_fwd: Option<f64>,
    #[serde(with = "opt_float")]
    pub eps_bwd: Option<f64>,
    #[serde(with = "opt_float")]
    pub delta: Option<f64>,
    #[serde(with = "opt_float")]
    pub bound: Option<f64>,
    pub runtime_ms: f64,
    /// Dephasing kind (`ideal`, `bump`, ...); empty for QAA.
    pub dephasing: String,
    /// `ok` or `error: <message>`.
    pub status: String,
    pub config_hash: String,
    pub seed: u64,
    pub dt: f64,
}

impl BenchRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// Human-readable grid point, used in error reports.
    pub fn point(&self) -> String {
        let mut s = format!("mode={} T_ad={} observable={}", self.mode.as_str(), self.t_ad, self.observable);
        if !self.dephasing.is_empty() {
            s.push_str(&format!(" dephasing={}", self.dephasing));
            if let Some(t_d) = self.t_d {
                s.push_str(&format!(" T_d={t_d}"));
            }
        }
        s
    }

    /// Curve key: records sharing it form one error-vs-T curve.
    pub fn curve(&self) -> String {
        match self.t_d {
            Some(t_d) if self.mode == Mode::Aev => format!(
                "{}/{}/{}/T_d={}",
                self.mode.as_str(),
                self.observable,
                self.dephasing,
                format_float(t_d)
            ),
            _ => format!("{}/{}", self.mode.as_str(), self.observable),
        }
    }
}

/// Shortest representation that round-trips; `inf`/`-inf`/`nan` spelled out.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

pub fn parse_float(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "inf" | "+inf" | "Infinity" => Ok(f64::INFINITY),
        "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
        "nan" | "NaN" => Ok(f64::NAN),
        t => t.parse().map_err(|_| format!("`{s}` is not a number")),
    }
}

/// Optional floats as strings so that `inf` and `nan` survive both CSV and
/// JSON; `None` is the empty string.
mod opt_float {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_str(&format_float(*x)),
            None => s.serialize_str(""),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
            Null(()),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Some(x)),
            Raw::Text(t) if t.trim().is_empty() => Ok(None),
            Raw::Text(t) => parse_float(&t).map(Some).map_err(serde::de::Error::custom),
            Raw::Null(()) => Ok(None),
        }
    }
}

/// Streaming CSV writer; flushes after every record.
pub struct RecordWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(out: W) -> Self {
        Self {
            inner: csv::WriterBuilder::new().has_headers(true).from_writer(out),
        }
    }

    pub fn write(&mut self, record: &BenchRecord) -> Result<()> {
        self.inner.serialize(record)?;
        self.inner.flush().map_err(|e| BenchError::io("records.csv", e))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| BenchError::io("records.csv", e))
    }
}

pub fn write_csv(path: &Path, records: &[BenchRecord]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    let mut w = RecordWriter::new(file);
    for r in records {
        w.write(r)?;
    }
    w.finish()
}

pub fn read_csv_from<R: Read>(input: R) -> Result<Vec<BenchRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Err(BenchError::Records("input is empty".into()));
    }
    for col in CSV_COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(BenchError::Records(format!("missing column `{col}`")));
        }
    }
    let mut out = Vec::new();
    for row in reader.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<BenchRecord>> {
    let file = std::fs::File::open(path).map_err(|e| BenchError::io(path, e))?;
    read_csv_from(file)
}

pub fn write_json(path: &Path, records: &[BenchRecord]) -> Result<()> {
    let text = serde_json::to_string_pretty(records)?;
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

pub fn read_json(path: &Path) -> Result<Vec<BenchRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Reads `.json` or CSV depending on the extension.
pub fn read_records(path: &Path) -> Result<Vec<BenchRecord>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => read_json(path),
        _ => read_csv(path),
    }
}
