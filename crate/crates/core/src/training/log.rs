//! Line-delimited JSON training log.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub epoch: usize,
    /// `train`, `val` or `test`.
    pub split: String,
    pub loss: f64,
    pub accuracy: f64,
    pub sparsity: f64,
    /// Synaptic operations per sample.
    pub sops: f64,
    pub lr_weights: f64,
    pub lr_delays: f64,
}

impl LogRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("log records serialise")
    }
}

/// Writes each record as one line and flushes, so the file stays valid if
/// the run is interrupted.
pub fn append_record(out: &mut dyn Write, rec: &LogRecord) -> Result<()> {
    writeln!(out, "{}", rec.to_line())?;
    out.flush()?;
    Ok(())
}

pub fn parse_log(text: &str) -> Result<Vec<LogRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| crate::Error::Data(format!("bad log line: {e}"))))
        .collect()
}
