use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::invalid(format!("unknown activation `{other}`"))),
        }
    }
}

/// Weight initialisation: zero-mean normal with variance `gain / fan_in`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitScheme {
    /// gain 2
    He,
    /// gain 1
    Lecun,
}

impl InitScheme {
    fn std(self, fan_in: usize) -> f64 {
        let gain = match self {
            InitScheme::He => 2.0,
            InitScheme::Lecun => 1.0,
        };
        (gain / fan_in as f64).sqrt()
    }
}

impl fmt::Display for InitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitScheme::He => "he",
            InitScheme::Lecun => "lecun",
        })
    }
}

impl FromStr for InitScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "he" => Ok(InitScheme::He),
            "lecun" => Ok(InitScheme::Lecun),
            other => Err(Error::invalid(format!("unknown init scheme `{other}`"))),
        }
    }
}

/// Architecture of a fully connected softmax classifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Input dimension, hidden widths, class count.
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub init: InitScheme,
}

impl ModelSpec {
    pub fn new(layer_sizes: Vec<usize>, activation: Activation) -> Self {
        Self {
            layer_sizes,
            activation,
            init: InitScheme::He,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::invalid(
                "a model needs at least an input and an output layer",
            ));
        }
        if self.layer_sizes.contains(&0) {
            return Err(Error::invalid("layer sizes must be >= 1"));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_classes(&self) -> usize {
        *self.layer_sizes.last().expect("validated spec")
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes: Vec<String> = self.layer_sizes.iter().map(|s| s.to_string()).collect();
        write!(f, "[{}] {}", sizes.join("-"), self.activation)
    }
}

/// A dense layer `z = W a + b` with `W` stored row-major as `(out, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub fan_in: usize,
    pub fan_out: usize,
}

impl Dense {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weights: vec![0.0; fan_in * fan_out],
            bias: vec![0.0; fan_out],
            fan_in,
            fan_out,
        }
    }

    /// `out[b, o] = bias[o] + Σ_i W[o, i] · input[b, i]`
    fn affine(&self, input: &[f64], batch: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(batch * self.fan_out);
        for row in input.chunks_exact(self.fan_in) {
            for (w, &b) in self.weights.chunks_exact(self.fan_in).zip(&self.bias) {
                out.push(b + dot(w, row));
            }
        }
        out
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradients with the same shapes as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    /// Flat views in parameter order: `w0, b0, w1, b1, ...`.
    pub fn slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }
}

/// Multilayer perceptron with a softmax output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    spec: ModelSpec,
    layers: Vec<Dense>,
}

struct ForwardCache {
    /// Layer inputs: `activations[0]` is the batch, `activations[l]` feeds layer `l`.
    activations: Vec<Vec<f64>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Vec<f64>>,
    logits: Vec<f64>,
}

/// Deterministic initialisation: normal weights scaled by fan-in, zero biases.
pub fn init_model(spec: &ModelSpec, seed: u64) -> Result<Mlp> {
    Mlp::init(spec, seed)
}

impl Mlp {
    pub fn zeros(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        let layers = spec
            .layer_sizes
            .windows(2)
            .map(|w| Dense::zeros(w[0], w[1]))
            .collect();
        Ok(Self {
            spec: spec.clone(),
            layers,
        })
    }

    pub fn init(spec: &ModelSpec, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(spec)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut model.layers {
            let normal = Normal::new(0.0, spec.init.std(layer.fan_in))
                .map_err(|e| Error::invalid(e.to_string()))?;
            for w in &mut layer.weights {
                *w = normal.sample(&mut rng);
            }
        }
        Ok(model)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    /// Flat mutable views in parameter order: `w0, b0, w1, b1, ...`.
    pub fn parameters_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    pub fn parameters(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }

    pub fn n_parameters(&self) -> usize {
        self.parameters().iter().map(|p| p.len()).sum()
    }

    /// Hash of the exact parameter bits.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for p in self.parameters() {
            for v in p {
                v.to_bits().hash(&mut h);
            }
        }
        h.finish()
    }

    fn batch_size(&self, inputs: &[f64]) -> Result<usize> {
        let d = self.spec.input_dim();
        if inputs.is_empty() || !inputs.len().is_multiple_of(d) {
            return Err(Error::invalid(format!(
                "input of length {} is not a nonempty batch of {d}-dimensional rows",
                inputs.len()
            )));
        }
        Ok(inputs.len() / d)
    }

    fn forward_cached(&self, inputs: &[f64], batch: usize) -> ForwardCache {
        let act = self.spec.activation;
        let mut activations = vec![inputs.to_vec()];
        let mut pre = Vec::with_capacity(self.layers.len() - 1);
        let (hidden, output) = self.layers.split_at(self.layers.len() - 1);
        for layer in hidden {
            let z = layer.affine(activations.last().expect("nonempty"), batch);
            activations.push(z.iter().map(|&v| act.apply(v)).collect());
            pre.push(z);
        }
        let logits = output[0].affine(activations.last().expect("nonempty"), batch);
        ForwardCache {
            activations,
            pre,
            logits,
        }
    }

    /// Class probabilities for a row-major batch; each output row sums to 1.
    pub fn forward(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let batch = self.batch_size(inputs)?;
        let mut probs = self.forward_cached(inputs, batch).logits;
        for row in probs.chunks_exact_mut(self.spec.n_classes()) {
            softmax_in_place(row);
        }
        Ok(probs)
    }

    fn check_labels(&self, batch: usize, classes: &[usize]) -> Result<()> {
        if classes.len() != batch {
            return Err(Error::invalid(format!(
                "{} labels for a batch of {batch}",
                classes.len()
            )));
        }
        let l = self.spec.n_classes();
        if let Some(&c) = classes.iter().find(|&&c| c >= l) {
            return Err(Error::invalid(format!("class index {c} >= class count {l}")));
        }
        Ok(())
    }

    /// Mean cross-entropy of the batch against 0-based class indices.
    pub fn loss(&self, inputs: &[f64], classes: &[usize]) -> Result<f64> {
        let batch = self.batch_size(inputs)?;
        self.check_labels(batch, classes)?;
        let logits = self.forward_cached(inputs, batch).logits;
        let total: f64 = logits
            .chunks_exact(self.spec.n_classes())
            .zip(classes)
            .map(|(row, &c)| log_sum_exp(row) - row[c])
            .sum();
        Ok(total / batch as f64)
    }

    /// Backpropagation of the mean softmax cross-entropy over the batch.
    /// Returns the gradients and the batch loss.
    pub fn backward(&self, inputs: &[f64], classes: &[usize]) -> Result<(Gradients, f64)> {
        let batch = self.batch_size(inputs)?;
        self.check_labels(batch, classes)?;
        let cache = self.forward_cached(inputs, batch);
        let l = self.spec.n_classes();
        let scale = 1.0 / batch as f64;

        // dL/dz at the output: (softmax - onehot) / batch
        let mut loss = 0.0;
        let mut delta = cache.logits;
        for (row, &c) in delta.chunks_exact_mut(l).zip(classes) {
            loss += log_sum_exp(row) - row[c];
            softmax_in_place(row);
            row[c] -= 1.0;
            row.iter_mut().for_each(|v| *v *= scale);
        }

        let mut grads: Vec<Dense> = self
            .layers
            .iter()
            .map(|d| Dense::zeros(d.fan_in, d.fan_out))
            .collect();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let input = &cache.activations[k];
            let g = &mut grads[k];
            for (d_row, a_row) in delta
                .chunks_exact(layer.fan_out)
                .zip(input.chunks_exact(layer.fan_in))
            {
                for (o, &d) in d_row.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    g.bias[o] += d;
                    let gw = &mut g.weights[o * layer.fan_in..(o + 1) * layer.fan_in];
                    gw.iter_mut().zip(a_row).for_each(|(w, &a)| *w += d * a);
                }
            }
            if k == 0 {
                break;
            }
            // propagate through W and the hidden activation below
            let act = self.spec.activation;
            let z = &cache.pre[k - 1];
            let mut prev = vec![0.0; batch * layer.fan_in];
            for ((p_row, d_row), (z_row, a_row)) in prev
                .chunks_exact_mut(layer.fan_in)
                .zip(delta.chunks_exact(layer.fan_out))
                .zip(z.chunks_exact(layer.fan_in).zip(input.chunks_exact(layer.fan_in)))
            {
                for (o, &d) in d_row.iter().enumerate() {
                    let w = &layer.weights[o * layer.fan_in..(o + 1) * layer.fan_in];
                    p_row.iter_mut().zip(w).for_each(|(p, &wv)| *p += d * wv);
                }
                for ((p, &zv), &av) in p_row.iter_mut().zip(z_row).zip(a_row) {
                    *p *= act.derivative(zv, av);
                }
            }
            delta = prev;
        }
        Ok((Gradients { layers: grads }, loss * scale))
    }
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    row.iter_mut().for_each(|v| *v /= total);
}
