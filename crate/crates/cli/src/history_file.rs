//! The `lblog/1` prediction-history format.
//!
//! A UTF-8 text file of JSON lines. The first line is the header:
//!
//! ```text
//! {"format":"lblog/1","name":"small-sgd","n_samples":3,"n_epochs":2,"n_runs":1,
//!  "sample_ids":["a","b","c"],"config":{...},"created_unix":1760000000}
//! ```
//!
//! followed by exactly `n_runs * n_epochs` records, one per finished epoch:
//!
//! ```text
//! {"run":0,"epoch":1,"p":[0.31,0.52,0.18]}
//! ```
//!
//! `run` is 0-based, `epoch` is 1-based, and `p` holds the true-label
//! probability of every sample in header order. `config` and `created_unix`
//! are optional. Records may appear in any order but every (run, epoch)
//! pair must occur exactly once. Writers emit them run-major.

use std::path::Path;

use lblab_core::{PredictionHistory, RunConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::fsutil;

pub const FORMAT_VERSION: &str = "lblog/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    n_samples: usize,
    n_epochs: usize,
    n_runs: usize,
    sample_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    created_unix: Option<u64>,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    run: usize,
    epoch: usize,
    p: &'a [f64],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordIn {
    run: usize,
    epoch: usize,
    p: Vec<f64>,
}

/// A history together with its self-describing metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryFile {
    pub name: Option<String>,
    /// Echo of the producing configuration; free-form for external producers.
    pub config: Option<serde_json::Value>,
    pub created_unix: Option<u64>,
    pub history: PredictionHistory,
}

impl HistoryFile {
    pub fn new(history: PredictionHistory) -> Self {
        Self {
            name: None,
            config: None,
            created_unix: None,
            history,
        }
    }

    pub fn with_run_config(mut self, name: &str, config: &RunConfig) -> Self {
        self.name = Some(name.to_string());
        self.config = serde_json::to_value(config).ok();
        self
    }

    pub fn stamped_now(mut self) -> Self {
        self.created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
        self
    }

    /// The echoed configuration, if it is one of ours.
    pub fn run_config(&self) -> Option<RunConfig> {
        self.config
            .as_ref()
            .and_then(|v| serde_json::from_value(v.clone()).ok())
    }

    pub fn to_text(&self) -> String {
        let h = &self.history;
        let header = Header {
            format: FORMAT_VERSION.to_string(),
            name: self.name.clone(),
            n_samples: h.n_samples(),
            n_epochs: h.n_epochs(),
            n_runs: h.n_runs(),
            sample_ids: h.sample_ids().to_vec(),
            config: self.config.clone(),
            created_unix: self.created_unix,
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for run in 0..h.n_runs() {
            for epoch in 0..h.n_epochs() {
                let record = RecordOut {
                    run,
                    epoch: epoch + 1,
                    p: h.record(run, epoch),
                };
                out.push_str(&serde_json::to_string(&record).expect("record serializes"));
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or("empty history file")?;
        let header: Header =
            serde_json::from_str(first).map_err(|e| format!("line 1: bad header: {e}"))?;
        if header.format != FORMAT_VERSION {
            return Err(format!(
                "unsupported format `{}` (expected {FORMAT_VERSION})",
                header.format
            ));
        }
        let (n, t_max, r_max) = (header.n_samples, header.n_epochs, header.n_runs);
        if header.sample_ids.len() != n {
            return Err(format!(
                "header lists {} sample ids but n_samples = {n}",
                header.sample_ids.len()
            ));
        }
        if n == 0 || t_max == 0 || r_max == 0 {
            return Err(format!("empty history (N={n}, T={t_max}, R={r_max})"));
        }
        let cells = n
            .checked_mul(t_max)
            .and_then(|c| c.checked_mul(r_max))
            .ok_or("history dimensions overflow")?;
        let mut values = vec![f64::NAN; cells];
        let mut seen = vec![false; t_max * r_max];
        for (idx, line) in lines {
            let lineno = idx + 1;
            let record: RecordIn = serde_json::from_str(line)
                .map_err(|e| format!("line {lineno}: bad record: {e}"))?;
            if record.run >= r_max || record.epoch == 0 || record.epoch > t_max {
                return Err(format!(
                    "line {lineno}: (run {}, epoch {}) outside R={r_max}, T={t_max}",
                    record.run, record.epoch
                ));
            }
            if record.p.len() != n {
                return Err(format!(
                    "line {lineno}: {} probabilities, expected {n}",
                    record.p.len()
                ));
            }
            let slot = record.run * t_max + record.epoch - 1;
            if std::mem::replace(&mut seen[slot], true) {
                return Err(format!(
                    "line {lineno}: duplicate record for run {}, epoch {}",
                    record.run, record.epoch
                ));
            }
            values[slot * n..(slot + 1) * n].copy_from_slice(&record.p);
        }
        if let Some(slot) = seen.iter().position(|s| !s) {
            return Err(format!(
                "missing record for run {}, epoch {}",
                slot / t_max,
                slot % t_max + 1
            ));
        }
        let history = PredictionHistory::new(header.sample_ids, t_max, r_max, values)
            .map_err(|e| e.to_string())?;
        Ok(Self {
            name: header.name,
            config: header.config,
            created_unix: header.created_unix,
            history,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fsutil::read_to_string(path)?;
        Self::parse(&text).map_err(|e| CliError::parse(path, e))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fsutil::write_atomic(path, self.to_text().as_bytes())
    }
}

/// The file contents with the header's creation timestamp removed; equal
/// inputs to a deterministic producer give equal payloads.
pub fn payload(text: &str) -> std::result::Result<String, String> {
    let mut file = HistoryFile::parse(text)?;
    file.created_unix = None;
    Ok(file.to_text())
}
