use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::learnability::LearnabilityVector;
use crate::error::{Error, Result};

/// Learnability rank per sample: 1 is the easiest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankVector {
    sample_ids: Vec<String>,
    ranks: Vec<usize>,
}

impl RankVector {
    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.ranks.iter().map(|&r| r as f64).collect()
    }
}

pub fn compute_ranks(scores: &LearnabilityVector) -> Result<RankVector> {
    Ok(RankVector {
        sample_ids: scores.sample_ids().to_vec(),
        ranks: rank_scores(scores.scores())?,
    })
}

/// `ranks[i] = |{ j : scores[j] >= scores[i] }|`.
///
/// Ties share the largest rank of their group, so a sample never ranks
/// better than the number of samples scoring at least as high. Computed by
/// sorting in O(N log N); equal to the pairwise count exactly.
pub fn rank_scores(scores: &[f64]) -> Result<Vec<usize>> {
    if scores.is_empty() {
        return Err(Error::invalid("cannot rank an empty score vector"));
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::invalid(format!("score at position {i} is NaN")));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    // descending; NaN excluded above so partial_cmp is total here
    order.sort_unstable_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(Ordering::Equal)
    });

    let mut ranks = vec![0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let value = scores[order[start]];
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == value {
            end += 1;
        }
        for &idx in &order[start..end] {
            ranks[idx] = end;
        }
        start = end;
    }
    Ok(ranks)
}
