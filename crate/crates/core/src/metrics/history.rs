use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability of the true label for every (run, epoch, sample) cell.
///
/// Values are stored densely in run-major order: the cell for run `r`,
/// epoch `t` and sample `i` lives at `(r * n_epochs + t) * n_samples + i`.
/// Epochs are 0-based here; epoch index `t` holds the prediction made after
/// the `t + 1`-th completed training epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionHistory {
    sample_ids: Vec<String>,
    n_epochs: usize,
    n_runs: usize,
    values: Vec<f64>,
}

impl PredictionHistory {
    /// Builds a history, checking dimensions, id uniqueness and that every
    /// cell is a probability.
    pub fn new(
        sample_ids: Vec<String>,
        n_epochs: usize,
        n_runs: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let n_samples = sample_ids.len();
        if n_samples == 0 || n_epochs == 0 || n_runs == 0 {
            return Err(Error::invalid(format!(
                "empty history (N={n_samples}, T={n_epochs}, R={n_runs})"
            )));
        }
        let expected = n_samples
            .checked_mul(n_epochs)
            .and_then(|v| v.checked_mul(n_runs))
            .ok_or_else(|| Error::invalid("history dimensions overflow"))?;
        if values.len() != expected {
            return Err(Error::invalid(format!(
                "history holds {} values, expected N*T*R = {expected}",
                values.len()
            )));
        }
        check_unique_ids(&sample_ids)?;
        for (idx, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                let i = idx % n_samples;
                let t = (idx / n_samples) % n_epochs;
                let r = idx / (n_samples * n_epochs);
                return Err(Error::invalid(format!(
                    "value {v} at (run {r}, epoch {t}, sample {i}) is outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            sample_ids,
            n_epochs,
            n_runs,
            values,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_epochs(&self) -> usize {
        self.n_epochs
    }

    pub fn n_runs(&self) -> usize {
        self.n_runs
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    /// The flat run-major tensor.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, run: usize, epoch: usize, sample: usize) -> f64 {
        assert!(run < self.n_runs && epoch < self.n_epochs && sample < self.n_samples());
        self.values[(run * self.n_epochs + epoch) * self.n_samples() + sample]
    }

    /// The N probabilities recorded after one epoch of one run.
    pub fn record(&self, run: usize, epoch: usize) -> &[f64] {
        assert!(run < self.n_runs && epoch < self.n_epochs);
        let n = self.n_samples();
        let start = (run * self.n_epochs + epoch) * n;
        &self.values[start..start + n]
    }

    /// A single-run history for run `run`.
    pub fn run(&self, run: usize) -> PredictionHistory {
        assert!(run < self.n_runs);
        let block = self.n_epochs * self.n_samples();
        PredictionHistory {
            sample_ids: self.sample_ids.clone(),
            n_epochs: self.n_epochs,
            n_runs: 1,
            values: self.values[run * block..(run + 1) * block].to_vec(),
        }
    }
}

pub(crate) fn check_unique_ids(ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::invalid(format!("duplicate sample id `{id}`")));
        }
    }
    Ok(())
}
