//! CSV tables: per-sample scores/ranks, histogram bins, correlation matrices,
//! and the plain-text correlation report.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use lblab_core::metrics::rank_scores;
use lblab_core::{CorrelationMatrix, Error as CoreError, Histogram2D, LearnabilityVector, RankVector};

use crate::error::{CliError, Result};
use crate::fsutil;

pub const SCORES_HEADER: [&str; 3] = ["sample_id", "learnability", "rank"];
pub const HISTOGRAM_HEADER: [&str; 5] = ["x_bin_lo", "x_bin_hi", "y_bin_lo", "y_bin_hi", "count"];

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub sample_id: String,
    pub learnability: f64,
    pub rank: usize,
}

/// Scores and ranks keyed by sample id, sorted by rank (easiest first).
/// Samples sharing a rank keep their original relative order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoresTable {
    rows: Vec<ScoreRow>,
}

fn csv_err(e: csv::Error) -> String {
    e.to_string()
}

impl ScoresTable {
    pub fn new(scores: &LearnabilityVector, ranks: &RankVector) -> Self {
        let mut rows: Vec<ScoreRow> = scores
            .sample_ids()
            .iter()
            .zip(scores.scores())
            .zip(ranks.ranks())
            .map(|((id, &learnability), &rank)| ScoreRow {
                sample_id: id.clone(),
                learnability,
                rank,
            })
            .collect();
        rows.sort_by_key(|r| r.rank);
        Self { rows }
    }

    pub fn rows(&self) -> &[ScoreRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SCORES_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.sample_id.as_str(),
                &r.learnability.to_string(),
                &r.rank.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    /// Parses a scores table and checks that its ranks agree with its scores.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(csv_err)?.clone();
        if header.iter().collect::<Vec<_>>() != SCORES_HEADER {
            return Err(format!(
                "expected header `{}`, found `{}`",
                SCORES_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ));
        }
        let mut rows = Vec::new();
        for (k, rec) in reader.records().enumerate() {
            let row = k + 1;
            let rec = rec.map_err(|e| format!("row {row}: {e}"))?;
            let learnability: f64 = rec[1]
                .parse()
                .map_err(|_| format!("row {row}, column learnability: `{}` is not a number", &rec[1]))?;
            let rank: usize = rec[2]
                .parse()
                .map_err(|_| format!("row {row}, column rank: `{}` is not a rank", &rec[2]))?;
            rows.push(ScoreRow {
                sample_id: rec[0].to_string(),
                learnability,
                rank,
            });
        }
        if rows.is_empty() {
            return Err("scores table has no rows".into());
        }
        let table = Self { rows };
        let vector = table.learnability().map_err(|e| e.to_string())?;
        let expected = rank_scores(vector.scores()).map_err(|e| e.to_string())?;
        if let Some(k) = (0..table.len()).find(|&k| table.rows[k].rank != expected[k]) {
            let r = &table.rows[k];
            return Err(format!(
                "sample `{}` has rank {} but its learnability implies {}",
                r.sample_id, r.rank, expected[k]
            ));
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fsutil::read_to_string(path)?;
        Self::parse(&text).map_err(|e| CliError::parse(path, e))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fsutil::write_atomic(path, self.to_csv().as_bytes())
    }

    /// Scores in file order.
    pub fn learnability(&self) -> lblab_core::Result<LearnabilityVector> {
        LearnabilityVector::new(
            self.rows.iter().map(|r| r.sample_id.clone()).collect(),
            self.rows.iter().map(|r| r.learnability).collect(),
        )
    }

    /// Scores reordered to follow `ids`. Fails with an alignment error at the
    /// first id that is absent here, or at the first id here that `ids` lacks.
    pub fn aligned_to(&self, ids: &[String]) -> lblab_core::Result<LearnabilityVector> {
        let index: HashMap<&str, usize> = self
            .rows
            .iter()
            .enumerate()
            .map(|(k, r)| (r.sample_id.as_str(), k))
            .collect();
        let mut scores = Vec::with_capacity(ids.len());
        for (position, id) in ids.iter().enumerate() {
            match index.get(id.as_str()) {
                Some(&k) => scores.push(self.rows[k].learnability),
                None => {
                    return Err(CoreError::Alignment {
                        position,
                        left: id.clone(),
                        right: "<missing>".into(),
                    })
                }
            }
        }
        if self.rows.len() != ids.len() {
            let wanted: std::collections::HashSet<&str> = ids.iter().map(String::as_str).collect();
            let extra = self
                .rows
                .iter()
                .find(|r| !wanted.contains(r.sample_id.as_str()))
                .map(|r| r.sample_id.clone())
                .unwrap_or_default();
            return Err(CoreError::Alignment {
                position: ids.len(),
                left: "<missing>".into(),
                right: extra,
            });
        }
        LearnabilityVector::new(ids.to_vec(), scores)
    }
}

pub fn histogram_csv(h: &Histogram2D) -> String {
    let mut out = HISTOGRAM_HEADER.join(",");
    out.push('\n');
    for (x_lo, x_hi, y_lo, y_hi, count) in h.bins() {
        let _ = writeln!(out, "{x_lo},{x_hi},{y_lo},{y_hi},{count}");
    }
    out
}

pub fn matrix_csv(names: &[String], m: &CorrelationMatrix) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![String::new()];
    header.extend(names.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (name, row) in names.iter().zip(m.rows()) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Square table with score correlations above the diagonal and rank
/// correlations, parenthesised, below it. A missing matrix leaves its
/// triangle as `-`.
pub fn correlation_table(
    names: &[String],
    score: Option<&CorrelationMatrix>,
    rank: Option<&CorrelationMatrix>,
) -> String {
    let k = names.len();
    let cell = |i: usize, j: usize| -> String {
        if i < j {
            score.map_or("-".into(), |m| format!("{:.4}", m.get(i, j)))
        } else if i > j {
            rank.map_or("-".into(), |m| format!("({:.4})", m.get(i, j)))
        } else {
            "-".into()
        }
    };
    let label_width = names.iter().map(|n| n.len()).max().unwrap_or(0).max(4);
    let col_width = names.iter().map(|n| n.len()).max().unwrap_or(0).max(9);
    let mut out = format!("{:label_width$}", "");
    for n in names {
        let _ = write!(out, " | {n:>col_width$}");
    }
    out.push('\n');
    out.push_str(&"-".repeat(label_width + k * (col_width + 3)));
    out.push('\n');
    for (i, n) in names.iter().enumerate() {
        let _ = write!(out, "{n:label_width$}");
        for j in 0..k {
            let _ = write!(out, " | {:>col_width$}", cell(i, j));
        }
        out.push('\n');
    }
    out
}
