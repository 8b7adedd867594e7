use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lblab_core::data::write_csv;
use lblab_core::{
    compute_learnability, compute_ranks, correlation_matrix, histogram2d, make_blobs,
    train_and_record, Activation, BlobParams, CorrelationMatrix, CorrelationMode,
    LearnabilityVector, ModelSpec, OptimizerSpec, RankVector, RunConfig, TrainReport,
};

use crate::error::{CliError, Result};
use crate::fsutil::{self, slug};
use crate::history_file::HistoryFile;
use crate::manifest::ExperimentManifest;
use crate::tables::{correlation_table, histogram_csv, matrix_csv, ScoresTable};

/// Outcome of one named configuration in `train`.
#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub name: String,
    pub path: PathBuf,
    pub config: RunConfig,
    pub report: TrainReport,
}

pub fn summary_table(summaries: &[TrainSummary]) -> String {
    let mut out = format!(
        "{:<20} {:<22} {:<18} {:>6} {:>4} {:>10} {:>10}\n",
        "name", "model", "optimizer", "epochs", "runs", "final_acc", "final_loss"
    );
    for s in summaries {
        let _ = writeln!(
            out,
            "{:<20} {:<22} {:<18} {:>6} {:>4} {:>10.4} {:>10.4}",
            s.name,
            s.config.model.to_string(),
            s.config.optimizer.to_string(),
            s.config.epochs,
            s.config.runs,
            s.report.mean_final_accuracy(),
            s.report.mean_final_loss(),
        );
    }
    out
}

/// Trains every configuration of the manifest and writes `<output>/<name>.lblog`.
///
/// The dataset and every configuration are validated before training starts.
pub fn train(manifest: &ExperimentManifest) -> Result<Vec<TrainSummary>> {
    let dataset = manifest.dataset.load()?;
    for run in &manifest.runs {
        let model = &run.config.model;
        if model.input_dim() != dataset.dim() || model.n_classes() < dataset.n_classes() {
            return Err(CliError::Usage(format!(
                "run `{}`: model {model} does not fit the dataset ({} features, {} classes)",
                run.name,
                dataset.dim(),
                dataset.n_classes()
            )));
        }
    }
    fsutil::ensure_dir(&manifest.output)?;

    let mut summaries = Vec::with_capacity(manifest.runs.len());
    for run in &manifest.runs {
        let report = train_and_record(&dataset, &run.config)?;
        let path = manifest.output.join(format!("{}.lblog", slug(&run.name)));
        HistoryFile::new(report.history.clone())
            .with_run_config(&run.name, &run.config)
            .stamped_now()
            .write(&path)?;
        summaries.push(TrainSummary {
            name: run.name.clone(),
            path,
            config: run.config.clone(),
            report,
        });
    }
    Ok(summaries)
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub scores: LearnabilityVector,
    pub ranks: RankVector,
    pub table: ScoresTable,
    pub output: PathBuf,
}

/// `foo.lblog` → `foo.scores.csv` in the same directory.
pub fn default_scores_path(history: &Path) -> PathBuf {
    let stem = history
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "history".into());
    history.with_file_name(format!("{stem}.scores.csv"))
}

/// Learnability and rank per sample, written sorted by rank.
pub fn analyze(history_path: &Path, output: Option<&Path>) -> Result<Analysis> {
    let file = HistoryFile::read(history_path)?;
    let mut scores = compute_learnability(&file.history);
    if let Some(name) = &file.name {
        scores = scores.with_provenance(name.clone());
    }
    let ranks = compute_ranks(&scores)?;
    let table = ScoresTable::new(&scores, &ranks);
    let output = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_scores_path(history_path));
    table.write(&output)?;
    Ok(Analysis {
        scores,
        ranks,
        table,
        output,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareMode {
    Score,
    Rank,
    Both,
}

impl CompareMode {
    fn includes(self, mode: CorrelationMode) -> bool {
        matches!(
            (self, mode),
            (CompareMode::Both, _)
                | (CompareMode::Score, CorrelationMode::Score)
                | (CompareMode::Rank, CorrelationMode::Rank)
        )
    }
}

impl std::str::FromStr for CompareMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "score" => Ok(CompareMode::Score),
            "rank" => Ok(CompareMode::Rank),
            "both" => Ok(CompareMode::Both),
            other => Err(format!("unknown mode `{other}` (score, rank or both)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub mode: CompareMode,
    pub score_bins: usize,
    pub rank_bins: usize,
    pub out_dir: PathBuf,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            mode: CompareMode::Both,
            score_bins: 200,
            rank_bins: 100,
            out_dir: PathBuf::from("."),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HistogramExport {
    pub mode: CorrelationMode,
    pub pair: (usize, usize),
    pub path: PathBuf,
    pub total: u64,
    pub overflow: u64,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub names: Vec<String>,
    pub score: Option<CorrelationMatrix>,
    pub rank: Option<CorrelationMatrix>,
    pub histograms: Vec<HistogramExport>,
    pub report: String,
}

/// Names derived from file names with the `.scores.csv`/`.csv` suffix
/// removed; repeated names get `#2`, `#3`, ...
fn input_names(paths: &[PathBuf]) -> Vec<String> {
    let mut names: Vec<String> = Vec::with_capacity(paths.len());
    for p in paths {
        let file = p
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_else(|| p.display().to_string());
        let base = file
            .strip_suffix(".scores.csv")
            .or_else(|| file.strip_suffix(".csv"))
            .unwrap_or(&file)
            .to_string();
        let mut name = base.clone();
        let mut k = 2;
        while names.contains(&name) {
            name = format!("{base}#{k}");
            k += 1;
        }
        names.push(name);
    }
    names
}

/// Correlation matrices and pairwise 2D histograms for two or more scores
/// tables, aligned on the first table's sample ids.
pub fn compare(inputs: &[PathBuf], options: &CompareOptions) -> Result<Comparison> {
    if inputs.len() < 2 {
        return Err(CliError::Usage(format!(
            "compare needs at least 2 scores files, got {}",
            inputs.len()
        )));
    }
    let tables = inputs
        .iter()
        .map(|p| ScoresTable::read(p))
        .collect::<Result<Vec<_>>>()?;
    let first = tables[0].learnability()?;
    if first.len() < 2 {
        return Err(CliError::Statistics("compare needs at least 2 samples".into()));
    }
    let ids = first.sample_ids().to_vec();
    let vectors = tables
        .iter()
        .map(|t| t.aligned_to(&ids))
        .collect::<lblab_core::Result<Vec<_>>>()?;
    let names = input_names(inputs);

    let score = options
        .mode
        .includes(CorrelationMode::Score)
        .then(|| correlation_matrix(&vectors, CorrelationMode::Score))
        .transpose()?;
    let rank = options
        .mode
        .includes(CorrelationMode::Rank)
        .then(|| correlation_matrix(&vectors, CorrelationMode::Rank))
        .transpose()?;

    fsutil::ensure_dir(&options.out_dir)?;
    let n = ids.len();
    let rank_vectors: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| compute_ranks(v).map(|r| r.as_f64()))
        .collect::<lblab_core::Result<_>>()?;
    let mut histograms = Vec::new();
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let pair_name = format!("{}__{}", slug(&names[i]), slug(&names[j]));
            if score.is_some() {
                let h = histogram2d(
                    vectors[i].scores(),
                    vectors[j].scores(),
                    options.score_bins,
                    options.score_bins,
                    (0.0, 1.0),
                    (0.0, 1.0),
                )?;
                let path = options.out_dir.join(format!("hist_score_{pair_name}.csv"));
                fsutil::write_atomic(&path, histogram_csv(&h).as_bytes())?;
                histograms.push(HistogramExport {
                    mode: CorrelationMode::Score,
                    pair: (i, j),
                    path,
                    total: h.total(),
                    overflow: h.overflow(),
                });
            }
            if rank.is_some() {
                let h = histogram2d(
                    &rank_vectors[i],
                    &rank_vectors[j],
                    options.rank_bins,
                    options.rank_bins,
                    (1.0, n as f64),
                    (1.0, n as f64),
                )?;
                let path = options.out_dir.join(format!("hist_rank_{pair_name}.csv"));
                fsutil::write_atomic(&path, histogram_csv(&h).as_bytes())?;
                histograms.push(HistogramExport {
                    mode: CorrelationMode::Rank,
                    pair: (i, j),
                    path,
                    total: h.total(),
                    overflow: h.overflow(),
                });
            }
        }
    }

    if let Some(m) = &score {
        let path = options.out_dir.join("correlation_score.csv");
        fsutil::write_atomic(&path, matrix_csv(&names, m).as_bytes())?;
    }
    if let Some(m) = &rank {
        let path = options.out_dir.join("correlation_rank.csv");
        fsutil::write_atomic(&path, matrix_csv(&names, m).as_bytes())?;
    }

    let mut report = format!(
        "Correlation across {} inputs over {n} samples\n\
         upper triangle: learnability (Pearson); lower triangle: learnability rank (parenthesized)\n\n",
        names.len()
    );
    report.push_str(&correlation_table(&names, score.as_ref(), rank.as_ref()));
    report.push_str("\nhistograms:\n");
    for h in &histograms {
        let _ = writeln!(
            report,
            "  {} {} vs {}: {} counted, {} overflow -> {}",
            h.mode,
            names[h.pair.0],
            names[h.pair.1],
            h.total,
            h.overflow,
            h.path.display()
        );
    }
    fsutil::write_atomic(&options.out_dir.join("correlation.txt"), report.as_bytes())?;

    Ok(Comparison {
        names,
        score,
        rank,
        histograms,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct DemoOptions {
    pub preset: String,
    pub epochs: usize,
    pub runs: usize,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl Default for DemoOptions {
    fn default() -> Self {
        Self {
            preset: "standard".into(),
            epochs: 50,
            runs: 3,
            seed: 0,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DemoReport {
    pub names: Vec<String>,
    pub configs: Vec<RunConfig>,
    pub reports: Vec<TrainReport>,
    pub vectors: Vec<LearnabilityVector>,
    pub score: CorrelationMatrix,
    pub rank: CorrelationMatrix,
    pub text: String,
}

/// One hidden layer of 16 units between the dataset's input and classes.
pub fn demo_model(dim: usize, classes: usize) -> ModelSpec {
    ModelSpec::new(vec![dim, 16, classes], Activation::Relu)
}

/// Trains the same model with SGD (0.01), Adam (0.001) and RMSprop (0.001)
/// from identical seeds and correlates the resulting learnability vectors.
pub fn demo_cross_optimizer(options: &DemoOptions) -> Result<DemoReport> {
    let dataset = make_blobs(&BlobParams::preset(&options.preset)?)?;
    let model = demo_model(dataset.dim(), dataset.n_classes());
    let optimizers = [OptimizerSpec::sgd(), OptimizerSpec::adam(), OptimizerSpec::rmsprop()];
    let mut names = Vec::new();
    let mut configs = Vec::new();
    let mut reports = Vec::new();
    let mut vectors = Vec::new();
    for opt in optimizers {
        let mut config = RunConfig::new(model.clone(), opt);
        config.epochs = options.epochs;
        config.runs = options.runs;
        config.base_seed = options.seed;
        let report = train_and_record(&dataset, &config)?;
        let name = opt.name().to_string();
        vectors.push(compute_learnability(&report.history).with_provenance(name.clone()));
        if let Some(dir) = &options.out_dir {
            fsutil::ensure_dir(dir)?;
            HistoryFile::new(report.history.clone())
                .with_run_config(&name, &config)
                .stamped_now()
                .write(&dir.join(format!("{name}.lblog")))?;
        }
        names.push(name);
        configs.push(config);
        reports.push(report);
    }
    let score = correlation_matrix(&vectors, CorrelationMode::Score)?;
    let rank = correlation_matrix(&vectors, CorrelationMode::Rank)?;

    let mut text = format!(
        "Cross-optimizer learnability on preset `{}` ({} samples), model {model}, T={}, R={}\n\n",
        options.preset,
        dataset.len(),
        options.epochs,
        options.runs
    );
    for ((name, config), r) in names.iter().zip(&configs).zip(&reports) {
        let _ = writeln!(
            text,
            "{name:<8} lr={:<6} final acc {:.4}  final loss {:.4}",
            config.optimizer.learning_rate,
            r.mean_final_accuracy(),
            r.mean_final_loss()
        );
    }
    text.push('\n');
    text.push_str(&correlation_table(&names, Some(&score), Some(&rank)));
    if let Some(dir) = &options.out_dir {
        for (name, v) in names.iter().zip(&vectors) {
            let table = ScoresTable::new(v, &compute_ranks(v)?);
            table.write(&dir.join(format!("{name}.scores.csv")))?;
        }
        fsutil::write_atomic(&dir.join("cross_optimizer.txt"), text.as_bytes())?;
    }
    Ok(DemoReport {
        names,
        configs,
        reports,
        vectors,
        score,
        rank,
        text,
    })
}

/// Writes a blob dataset as CSV to `out`, or returns the text when `out` is
/// `None`.
pub fn synth(params: &BlobParams, out: Option<&Path>) -> Result<String> {
    let dataset = make_blobs(params)?;
    let mut buf = Vec::new();
    write_csv(&dataset, &mut buf)?;
    if let Some(path) = out {
        fsutil::write_atomic(path, &buf)?;
    }
    String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))
}
