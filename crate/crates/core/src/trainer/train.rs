use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{Mlp, ModelSpec};
use super::optim::{OptimizerSpec, OptimizerState};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::PredictionHistory;

/// Rows per forward call in the recording pass.
const RECORD_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub optimizer: OptimizerSpec,
    pub epochs: usize,
    pub runs: usize,
    pub batch_size: usize,
    /// Run `r` is seeded with `base_seed + r`.
    pub base_seed: u64,
    pub shuffle_each_epoch: bool,
}

impl RunConfig {
    /// 5 runs of 50 epochs, batches of 32, reshuffled every epoch.
    pub fn new(model: ModelSpec, optimizer: OptimizerSpec) -> Self {
        Self {
            model,
            optimizer,
            epochs: 50,
            runs: 5,
            batch_size: 32,
            base_seed: 0,
            shuffle_each_epoch: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.optimizer.validate()?;
        if self.epochs == 0 || self.runs == 0 || self.batch_size == 0 {
            return Err(Error::invalid(format!(
                "epochs ({}), runs ({}) and batch_size ({}) must all be >= 1",
                self.epochs, self.runs, self.batch_size
            )));
        }
        Ok(())
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub history: PredictionHistory,
    /// Fraction of training samples whose argmax is the true label after
    /// the last epoch, per run.
    pub final_accuracy: Vec<f64>,
    /// Mean cross-entropy over the whole training set after each epoch,
    /// per run.
    pub loss_curves: Vec<Vec<f64>>,
}

impl TrainReport {
    pub fn mean_final_accuracy(&self) -> f64 {
        self.final_accuracy.iter().sum::<f64>() / self.final_accuracy.len() as f64
    }

    pub fn mean_final_loss(&self) -> f64 {
        let last: Vec<f64> = self
            .loss_curves
            .iter()
            .map(|c| *c.last().expect("T >= 1"))
            .collect();
        last.iter().sum::<f64>() / last.len() as f64
    }
}

/// Probabilities assigned to each sample's true label, in dataset order.
pub fn record_predictions(model: &Mlp, dataset: &Dataset) -> Result<Vec<f64>> {
    let l = model.spec().n_classes();
    let mut out = Vec::with_capacity(dataset.len());
    let dim = dataset.dim();
    for (chunk_idx, rows) in dataset.features().chunks(RECORD_CHUNK * dim).enumerate() {
        let probs = model.forward(rows)?;
        for (k, row) in probs.chunks_exact(l).enumerate() {
            let i = chunk_idx * RECORD_CHUNK + k;
            out.push(row[dataset.class_index(i)].clamp(0.0, 1.0));
        }
    }
    Ok(out)
}

fn accuracy(model: &Mlp, dataset: &Dataset) -> Result<f64> {
    let l = model.spec().n_classes();
    let probs = model.forward(dataset.features())?;
    let correct = probs
        .chunks_exact(l)
        .enumerate()
        .filter(|(i, row)| {
            let best = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(k, _)| k)
                .expect("L >= 1");
            best == dataset.class_index(*i)
        })
        .count();
    Ok(correct as f64 / dataset.len() as f64)
}

struct RunOutput {
    records: Vec<f64>,
    loss_curve: Vec<f64>,
    accuracy: f64,
}

fn train_one_run(dataset: &Dataset, config: &RunConfig, run: usize) -> Result<RunOutput> {
    let seed = config.run_seed(run);
    let mut model = Mlp::init(&config.model, seed)?;
    let sizes: Vec<usize> = model.parameters().iter().map(|p| p.len()).collect();
    let mut optimizer = OptimizerState::new(config.optimizer, &sizes)?;
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seed);
    shuffle_rng.set_stream(1);

    let n = dataset.len();
    let dim = dataset.dim();
    let mut order: Vec<usize> = (0..n).collect();
    let mut records = Vec::with_capacity(config.epochs * n);
    let mut loss_curve = Vec::with_capacity(config.epochs);
    let mut inputs = Vec::with_capacity(config.batch_size * dim);
    let mut classes = Vec::with_capacity(config.batch_size);

    for _ in 0..config.epochs {
        if config.shuffle_each_epoch {
            order.shuffle(&mut shuffle_rng);
        }
        for batch in order.chunks(config.batch_size) {
            inputs.clear();
            classes.clear();
            for &i in batch {
                inputs.extend_from_slice(dataset.row(i));
                classes.push(dataset.class_index(i));
            }
            let (grads, _) = model.backward(&inputs, &classes)?;
            optimizer.step(&mut model.parameters_mut(), &grads.slices())?;
        }
        let p_true = record_predictions(&model, dataset)?;
        let loss = p_true
            .iter()
            .map(|&p| -p.max(f64::MIN_POSITIVE).ln())
            .sum::<f64>()
            / n as f64;
        loss_curve.push(loss);
        records.extend(p_true);
    }
    Ok(RunOutput {
        records,
        loss_curve,
        accuracy: accuracy(&model, dataset)?,
    })
}

/// Trains `config.runs` independently seeded models for `config.epochs`
/// epochs each. After every epoch the model predicts the whole training set
/// in dataset order and the probability of each true label is recorded.
///
/// Runs execute on the current rayon pool; the result does not depend on
/// the number of threads.
pub fn train_and_record(dataset: &Dataset, config: &RunConfig) -> Result<TrainReport> {
    config.validate()?;
    if dataset.dim() != config.model.input_dim() {
        return Err(Error::invalid(format!(
            "dataset has {} features but the model expects {}",
            dataset.dim(),
            config.model.input_dim()
        )));
    }
    let l = config.model.n_classes();
    if let Some(i) = dataset.labels().iter().position(|&y| y as usize > l) {
        return Err(Error::invalid(format!(
            "label {} of sample `{}` is outside 1..={l}",
            dataset.labels()[i],
            dataset.sample_ids()[i]
        )));
    }

    let outputs = (0..config.runs)
        .into_par_iter()
        .map(|r| train_one_run(dataset, config, r))
        .collect::<Result<Vec<_>>>()?;

    let mut values = Vec::with_capacity(config.runs * config.epochs * dataset.len());
    let mut final_accuracy = Vec::with_capacity(config.runs);
    let mut loss_curves = Vec::with_capacity(config.runs);
    for out in outputs {
        values.extend(out.records);
        final_accuracy.push(out.accuracy);
        loss_curves.push(out.loss_curve);
    }
    let history = PredictionHistory::new(
        dataset.sample_ids().to_vec(),
        config.epochs,
        config.runs,
        values,
    )?;
    Ok(TrainReport {
        history,
        final_accuracy,
        loss_curves,
    })
}
