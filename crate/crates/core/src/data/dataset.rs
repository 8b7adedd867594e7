use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{check_unique_ids, PredictionHistory};

/// Ground-truth difficulty of a synthetic sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DifficultyTag {
    Clean,
    Noisy,
    Boundary,
}

impl DifficultyTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DifficultyTag::Clean => "clean",
            DifficultyTag::Noisy => "noisy",
            DifficultyTag::Boundary => "boundary",
        }
    }
}

impl fmt::Display for DifficultyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DifficultyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clean" => Ok(DifficultyTag::Clean),
            "noisy" => Ok(DifficultyTag::Noisy),
            "boundary" => Ok(DifficultyTag::Boundary),
            other => Err(Error::invalid(format!("unknown difficulty tag `{other}`"))),
        }
    }
}

/// Labelled feature rows. Labels are 1-based class numbers in `1..=n_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    dim: usize,
    labels: Vec<u32>,
    n_classes: usize,
    sample_ids: Vec<String>,
    tags: Option<Vec<DifficultyTag>>,
}

impl Dataset {
    /// `features` is row-major with `dim` columns.
    pub fn new(
        features: Vec<f64>,
        dim: usize,
        labels: Vec<u32>,
        n_classes: usize,
        sample_ids: Vec<String>,
        tags: Option<Vec<DifficultyTag>>,
    ) -> Result<Self> {
        let n = sample_ids.len();
        if n == 0 {
            return Err(Error::invalid("dataset has no samples"));
        }
        if dim == 0 {
            return Err(Error::invalid("dataset has no feature columns"));
        }
        if features.len() != n * dim {
            return Err(Error::invalid(format!(
                "{} feature values for {n} samples of dimension {dim}",
                features.len()
            )));
        }
        if labels.len() != n {
            return Err(Error::invalid(format!("{} labels for {n} samples", labels.len())));
        }
        if let Some(t) = &tags {
            if t.len() != n {
                return Err(Error::invalid(format!("{} tags for {n} samples", t.len())));
            }
        }
        if let Some(i) = labels
            .iter()
            .position(|&l| l == 0 || l as usize > n_classes)
        {
            return Err(Error::invalid(format!(
                "label {} of sample `{}` is outside 1..={n_classes}",
                labels[i], sample_ids[i]
            )));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite feature in sample `{}`",
                sample_ids[i / dim]
            )));
        }
        check_unique_ids(&sample_ids)?;
        Ok(Self {
            features,
            dim,
            labels,
            n_classes,
            sample_ids,
            tags,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    /// 1-based labels.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// 0-based class index of sample `i`.
    pub fn class_index(&self, i: usize) -> usize {
        self.labels[i] as usize - 1
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn tags(&self) -> Option<&[DifficultyTag]> {
        self.tags.as_deref()
    }

    /// Sample positions carrying `tag`; empty for untagged data.
    pub fn indices_tagged(&self, tag: DifficultyTag) -> Vec<usize> {
        self.tags()
            .map(|tags| {
                tags.iter()
                    .enumerate()
                    .filter(|(_, &t)| t == tag)
                    .map(|(i, _)| i)
                    .collect()
            })
            .unwrap_or_default()
    }

    /// True when `history` was recorded on this dataset's samples in order.
    pub fn matches_history(&self, history: &PredictionHistory) -> bool {
        history.sample_ids() == self.sample_ids()
    }
}
