//! Experiment manifests: plain-text `key = value` lines, global keys first,
//! then one `[run NAME]` section per configuration.
//!
//! ```text
//! version = lbman/1
//! dataset = preset:standard
//! output = runs
//!
//! [run small-sgd]
//! layers = 8,16,4
//! optimizer = sgd
//! learning_rate = 0.01
//! epochs = 50
//! runs = 3
//! ```
//!
//! Global keys: `version` (optional, must be `lbman/1`), `dataset`
//! (`preset:NAME` or `csv:PATH`), `output` (directory, default: the
//! manifest's directory), and for CSV datasets `label_column`, `id_column`,
//! `tag_column`, `feature_columns` (comma separated). Relative paths resolve
//! against the manifest's directory.
//!
//! Run keys: `layers` (required), `activation` (relu|tanh), `init`
//! (he|lecun), `optimizer` (sgd|adam|rmsprop), `learning_rate`, `momentum`,
//! `beta1`, `beta2`, `epsilon`, `rho`, `epochs`, `runs`, `batch_size`,
//! `seed`, `shuffle` (true|false). Omitted keys take the library defaults.
//! `#` starts a comment line.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lblab_core::data::load_csv;
use lblab_core::trainer::OptimizerKind;
use lblab_core::{make_blobs, BlobParams, CsvSchema, Dataset, ModelSpec, OptimizerSpec, RunConfig};

use crate::error::{CliError, Result};
use crate::fsutil;

pub const MANIFEST_VERSION: &str = "lbman/1";

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetRef {
    Preset(String),
    Csv { path: PathBuf, schema: CsvSchema },
}

impl DatasetRef {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetRef::Preset(name) => Ok(make_blobs(&BlobParams::preset(name)?)?),
            DatasetRef::Csv { path, schema } => load_csv(path, schema).map_err(|e| match e {
                lblab_core::Error::Parse { .. } => CliError::parse(path, e),
                lblab_core::Error::Io(_) => CliError::Io(e.to_string()),
                other => other.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedRun {
    pub name: String,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentManifest {
    pub version: String,
    pub dataset: DatasetRef,
    pub output: PathBuf,
    pub runs: Vec<NamedRun>,
}

type Section = (usize, String, BTreeMap<String, (usize, String)>);

fn usage(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("manifest line {line}: {msg}"))
}

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| usage(line, format!("invalid value `{raw}` for `{key}`")))
}

fn list<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',').map(|p| value(line, key, p.trim())).collect()
}

impl ExperimentManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fsutil::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses manifest text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut globals: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut sections: Vec<Section> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(inner) = trimmed.strip_prefix('[') {
                let inner = inner
                    .strip_suffix(']')
                    .ok_or_else(|| usage(line, "unterminated section header"))?;
                let name = inner
                    .trim()
                    .strip_prefix("run ")
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .ok_or_else(|| usage(line, "sections must be `[run NAME]`"))?;
                sections.push((line, name.to_string(), BTreeMap::new()));
                continue;
            }
            let (key, val) = trimmed
                .split_once('=')
                .ok_or_else(|| usage(line, "expected `key = value`"))?;
            let (key, val) = (key.trim().to_string(), val.trim().to_string());
            let target = match sections.last_mut() {
                Some((_, _, map)) => map,
                None => &mut globals,
            };
            if target.insert(key.clone(), (line, val)).is_some() {
                return Err(usage(line, format!("duplicate key `{key}`")));
            }
        }

        let mut seen = HashSet::new();
        for (line, name, _) in &sections {
            if !seen.insert(name.as_str()) {
                return Err(usage(*line, format!("duplicate run name `{name}`")));
            }
        }
        if sections.is_empty() {
            return Err(CliError::Usage("manifest defines no `[run NAME]` sections".into()));
        }

        let version = match globals.remove("version") {
            Some((line, v)) if v != MANIFEST_VERSION => {
                return Err(usage(line, format!("unsupported version `{v}`, expected {MANIFEST_VERSION}")))
            }
            _ => MANIFEST_VERSION.to_string(),
        };
        let output = globals
            .remove("output")
            .map(|(_, v)| base.join(v))
            .unwrap_or_else(|| base.to_path_buf());
        let dataset = parse_dataset(&mut globals, base)?;
        if let Some((key, (line, _))) = globals.into_iter().next() {
            return Err(usage(line, format!("unknown global key `{key}`")));
        }

        let runs = sections
            .into_iter()
            .map(|(line, name, keys)| {
                let config = parse_run(line, keys)?;
                Ok(NamedRun { name, config })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            version,
            dataset,
            output,
            runs,
        })
    }
}

fn parse_dataset(globals: &mut BTreeMap<String, (usize, String)>, base: &Path) -> Result<DatasetRef> {
    let (line, spec) = globals
        .remove("dataset")
        .ok_or_else(|| CliError::Usage("manifest has no `dataset` key".into()))?;
    let csv_keys = ["label_column", "id_column", "tag_column", "feature_columns"];
    if let Some(name) = spec.strip_prefix("preset:") {
        BlobParams::preset(name).map_err(|e| usage(line, e))?;
        if let Some(k) = csv_keys.iter().find(|k| globals.contains_key(**k)) {
            return Err(usage(globals[*k].0, format!("`{k}` only applies to csv datasets")));
        }
        return Ok(DatasetRef::Preset(name.to_string()));
    }
    if let Some(path) = spec.strip_prefix("csv:") {
        let mut schema = CsvSchema::default();
        if let Some((_, v)) = globals.remove("label_column") {
            schema.label_column = v;
        }
        schema.id_column = globals.remove("id_column").map(|(_, v)| v);
        schema.tag_column = globals.remove("tag_column").map(|(_, v)| v);
        schema.feature_columns = globals
            .remove("feature_columns")
            .map(|(_, v)| v.split(',').map(|c| c.trim().to_string()).collect());
        return Ok(DatasetRef::Csv {
            path: base.join(path.trim()),
            schema,
        });
    }
    Err(usage(line, format!("dataset `{spec}` must be `preset:NAME` or `csv:PATH`")))
}

fn parse_run(section_line: usize, mut keys: BTreeMap<String, (usize, String)>) -> Result<RunConfig> {
    let mut take = |k: &str| keys.remove(k);

    let (line, raw) = take("layers").ok_or_else(|| usage(section_line, "run is missing `layers`"))?;
    let mut model = ModelSpec::new(list(line, "layers", &raw)?, lblab_core::Activation::Relu);
    if let Some((line, v)) = take("activation") {
        model.activation = value(line, "activation", &v)?;
    }
    if let Some((line, v)) = take("init") {
        model.init = value(line, "init", &v)?;
    }

    let mut optimizer = match take("optimizer") {
        Some((line, v)) => OptimizerSpec::by_name(&v).map_err(|e| usage(line, e))?,
        None => OptimizerSpec::sgd(),
    };
    if let Some((line, v)) = take("learning_rate") {
        optimizer.learning_rate = value(line, "learning_rate", &v)?;
    }
    let mut hyper = |key: &str, slot: &mut f64| -> Result<()> {
        if let Some((line, v)) = keys.remove(key) {
            *slot = value(line, key, &v)?;
        }
        Ok(())
    };
    match &mut optimizer.kind {
        OptimizerKind::Sgd { momentum } => hyper("momentum", momentum)?,
        OptimizerKind::Adam { beta1, beta2, epsilon } => {
            hyper("beta1", beta1)?;
            hyper("beta2", beta2)?;
            hyper("epsilon", epsilon)?;
        }
        OptimizerKind::RmsProp { rho, epsilon } => {
            hyper("rho", rho)?;
            hyper("epsilon", epsilon)?;
        }
    }

    let mut config = RunConfig::new(model, optimizer);
    let mut count = |key: &str, slot: &mut usize| -> Result<()> {
        if let Some((line, v)) = keys.remove(key) {
            *slot = value(line, key, &v)?;
        }
        Ok(())
    };
    count("epochs", &mut config.epochs)?;
    count("runs", &mut config.runs)?;
    count("batch_size", &mut config.batch_size)?;
    if let Some((line, v)) = keys.remove("seed") {
        config.base_seed = value(line, "seed", &v)?;
    }
    if let Some((line, v)) = keys.remove("shuffle") {
        config.shuffle_each_epoch = value(line, "shuffle", &v)?;
    }
    if let Some((key, (line, _))) = keys.into_iter().next() {
        return Err(usage(line, format!("unknown or inapplicable run key `{key}`")));
    }
    config.validate().map_err(|e| usage(section_line, e))?;
    Ok(config)
}
