use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::learnability::LearnabilityVector;
use super::rank::rank_scores;
use crate::error::{Error, Result};
use crate::numeric;

/// Pearson product-moment correlation, computed in two passes around the
/// compensated means.
///
/// Returns [`Error::Degenerate`] when either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::invalid("pearson needs at least 2 points"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("pearson input contains non-finite values"));
    }
    let mx = numeric::mean(x);
    let my = numeric::mean(y);
    let mut sxy = numeric::KahanSum::new();
    let mut sxx = numeric::KahanSum::new();
    let mut syy = numeric::KahanSum::new();
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy.add(dx * dy);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    let (sxx, syy) = (sxx.total(), syy.total());
    if sxx == 0.0 {
        return Err(Error::Degenerate("first vector is constant".into()));
    }
    if syy == 0.0 {
        return Err(Error::Degenerate("second vector is constant".into()));
    }
    let r = sxy.total() / (sxx.sqrt() * syy.sqrt());
    Ok(r.clamp(-1.0, 1.0))
}

/// Fails with [`Error::Alignment`] at the first position where the ids differ.
pub fn check_alignment(a: &[String], b: &[String]) -> Result<()> {
    for (position, (l, r)) in a.iter().zip(b).enumerate() {
        if l != r {
            return Err(Error::Alignment {
                position,
                left: l.clone(),
                right: r.clone(),
            });
        }
    }
    if a.len() != b.len() {
        let position = a.len().min(b.len());
        let missing = "<missing>".to_string();
        return Err(Error::Alignment {
            position,
            left: a.get(position).cloned().unwrap_or_else(|| missing.clone()),
            right: b.get(position).cloned().unwrap_or(missing),
        });
    }
    Ok(())
}

/// Pearson correlation of the two rank vectors.
pub fn rank_correlation(a: &LearnabilityVector, b: &LearnabilityVector) -> Result<f64> {
    check_alignment(a.sample_ids(), b.sample_ids())?;
    let ra = ranks_as_f64(a.scores())?;
    let rb = ranks_as_f64(b.scores())?;
    pearson(&ra, &rb)
}

fn ranks_as_f64(scores: &[f64]) -> Result<Vec<f64>> {
    Ok(rank_scores(scores)?.into_iter().map(|r| r as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMode {
    Score,
    Rank,
}

impl fmt::Display for CorrelationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationMode::Score => "score",
            CorrelationMode::Rank => "rank",
        })
    }
}

impl FromStr for CorrelationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "score" => Ok(CorrelationMode::Score),
            "rank" => Ok(CorrelationMode::Rank),
            other => Err(Error::invalid(format!("unknown correlation mode `{other}`"))),
        }
    }
}

/// Square symmetric matrix of pairwise correlations, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    size: usize,
    values: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.size)
    }
}

/// Pairwise correlations between learnability vectors, either on the raw
/// scores or on their rank vectors. The diagonal is exactly 1.
pub fn correlation_matrix(
    vectors: &[LearnabilityVector],
    mode: CorrelationMode,
) -> Result<CorrelationMatrix> {
    if vectors.len() < 2 {
        return Err(Error::invalid(format!(
            "correlation matrix needs at least 2 vectors, got {}",
            vectors.len()
        )));
    }
    let first = vectors[0].sample_ids();
    for v in &vectors[1..] {
        check_alignment(first, v.sample_ids())?;
    }
    let columns: Vec<Vec<f64>> = match mode {
        CorrelationMode::Score => vectors.iter().map(|v| v.scores().to_vec()).collect(),
        CorrelationMode::Rank => vectors
            .iter()
            .map(|v| ranks_as_f64(v.scores()))
            .collect::<Result<_>>()?,
    };

    let k = vectors.len();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let entries = pairs
        .par_iter()
        .map(|&(i, j)| pearson(&columns[i], &columns[j]))
        .collect::<Result<Vec<_>>>()?;

    let mut values = vec![0.0; k * k];
    for i in 0..k {
        values[i * k + i] = 1.0;
    }
    for (&(i, j), r) in pairs.iter().zip(entries) {
        values[i * k + j] = r;
        values[j * k + i] = r;
    }
    Ok(CorrelationMatrix { size: k, values })
}
