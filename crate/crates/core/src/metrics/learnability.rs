use serde::{Deserialize, Serialize};

use super::history::{check_unique_ids, PredictionHistory};
use crate::error::{Error, Result};
use crate::numeric::KahanSum;

/// Per-sample learnability score aligned with a list of sample ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnabilityVector {
    sample_ids: Vec<String>,
    scores: Vec<f64>,
    /// Name of the run configuration that produced the scores, if known.
    provenance: Option<String>,
}

impl LearnabilityVector {
    pub fn new(sample_ids: Vec<String>, scores: Vec<f64>) -> Result<Self> {
        if sample_ids.len() != scores.len() {
            return Err(Error::invalid(format!(
                "{} sample ids but {} scores",
                sample_ids.len(),
                scores.len()
            )));
        }
        if scores.is_empty() {
            return Err(Error::invalid("learnability vector is empty"));
        }
        check_unique_ids(&sample_ids)?;
        if let Some((i, v)) = scores
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::invalid(format!(
                "score {v} of sample `{}` is outside [0, 1]",
                sample_ids[i]
            )));
        }
        Ok(Self {
            sample_ids,
            scores,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = Some(provenance.into());
        self
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Time-averaged true-label probability, averaged again over runs.
///
/// `scores[i] = (1/R) Σ_r (1/T) Σ_t p[r, t, i]`, accumulated with
/// compensated summation. Since every cell of a valid history lies in
/// `[0, 1]`, so does every score.
pub fn compute_learnability(history: &PredictionHistory) -> LearnabilityVector {
    let n = history.n_samples();
    let cells = (history.n_runs() * history.n_epochs()) as f64;
    let mut acc = vec![KahanSum::new(); n];
    for r in 0..history.n_runs() {
        for t in 0..history.n_epochs() {
            for (a, &p) in acc.iter_mut().zip(history.record(r, t)) {
                a.add(p);
            }
        }
    }
    let scores = acc
        .iter()
        // the clamp only absorbs last-ulp rounding of the mean
        .map(|a| (a.total() / cells).clamp(0.0, 1.0))
        .collect();
    LearnabilityVector {
        sample_ids: history.sample_ids().to_vec(),
        scores,
        provenance: None,
    }
}
