use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, DifficultyTag};
use crate::error::{Error, Result};

/// Which columns of a CSV file hold what.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    /// Feature columns in order; `None` takes every column not named below.
    pub feature_columns: Option<Vec<String>>,
    pub label_column: String,
    /// Sample ids; synthesized as `row-k` (k = 1-based data row) when absent.
    pub id_column: Option<String>,
    pub tag_column: Option<String>,
    /// Class count; defaults to the largest label present.
    pub n_classes: Option<usize>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            feature_columns: None,
            label_column: "label".into(),
            id_column: None,
            tag_column: None,
            n_classes: None,
        }
    }
}

impl CsvSchema {
    /// The layout written by [`write_csv`]: `sample_id,x1..xD,label,tag`.
    pub fn tagged() -> Self {
        Self {
            id_column: Some("sample_id".into()),
            tag_column: Some("tag".into()),
            ..Self::default()
        }
    }
}

fn parse_err(row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_csv(&text, schema)
}

pub fn parse_csv(text: &str, schema: &CsvSchema) -> Result<Dataset> {
    if text.trim().is_empty() {
        return Err(parse_err(0, "", "empty file"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(0, "", e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(0, name, "missing column"))
    };

    let label_idx = find(&schema.label_column)?;
    let id_idx = schema.id_column.as_deref().map(find).transpose()?;
    let tag_idx = schema.tag_column.as_deref().map(find).transpose()?;
    let feature_idx: Vec<usize> = match &schema.feature_columns {
        Some(cols) => cols.iter().map(|c| find(c)).collect::<Result<_>>()?,
        None => (0..headers.len())
            .filter(|&i| Some(i) != Some(label_idx) && Some(i) != id_idx && Some(i) != tag_idx)
            .collect(),
    };
    if feature_idx.is_empty() {
        return Err(parse_err(0, "", "no feature columns"));
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    let mut tags = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths {
                expected_len, len, ..
            } => parse_err(
                row,
                "",
                format!("ragged row: {len} fields, expected {expected_len}"),
            ),
            _ => parse_err(row, "", e.to_string()),
        })?;
        for &c in &feature_idx {
            let cell = &record[c];
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(row, &headers[c], format!("`{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(row, &headers[c], "non-finite value"));
            }
            features.push(v);
        }
        let cell = &record[label_idx];
        let label: u32 = cell.parse().map_err(|_| {
            parse_err(
                row,
                &headers[label_idx],
                format!("`{cell}` is not a positive integer label"),
            )
        })?;
        if label == 0 {
            return Err(parse_err(row, &headers[label_idx], "labels are 1-based"));
        }
        labels.push(label);
        ids.push(match id_idx {
            Some(c) => record[c].to_string(),
            None => format!("row-{row}"),
        });
        if let Some(c) = tag_idx {
            tags.push(
                record[c]
                    .parse::<DifficultyTag>()
                    .map_err(|e| parse_err(row, &headers[c], e.to_string()))?,
            );
        }
    }
    if labels.is_empty() {
        return Err(parse_err(1, "", "no data rows"));
    }
    let n_classes = schema
        .n_classes
        .unwrap_or_else(|| labels.iter().copied().max().unwrap_or(1) as usize);
    let tags = tag_idx.map(|_| tags);
    Dataset::new(features, feature_idx.len(), labels, n_classes, ids, tags)
}

/// Writes `sample_id,x1..xD,label[,tag]`; readable with [`CsvSchema::tagged`]
/// (or the default schema plus `id_column` for untagged data).
pub fn write_csv(dataset: &Dataset, out: &mut impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["sample_id".to_string()];
    header.extend((1..=dataset.dim()).map(|j| format!("x{j}")));
    header.push("label".into());
    if dataset.tags().is_some() {
        header.push("tag".into());
    }
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    for i in 0..dataset.len() {
        let mut rec = vec![dataset.sample_ids()[i].clone()];
        rec.extend(dataset.row(i).iter().map(|v| v.to_string()));
        rec.push(dataset.labels()[i].to_string());
        if let Some(tags) = dataset.tags() {
            rec.push(tags[i].to_string());
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
