use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Update rule and its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerKind {
    /// `v ← μv − η g; θ ← θ + v`
    Sgd { momentum: f64 },
    /// Bias-corrected Adam: `θ ← θ − η m̂ / (√v̂ + ε)`.
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
    /// `s ← ρ s + (1 − ρ) g²; θ ← θ − η g / √(s + ε)`
    RmsProp { rho: f64, epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
}

impl OptimizerSpec {
    /// Plain SGD at learning rate 0.01.
    pub fn sgd() -> Self {
        Self {
            kind: OptimizerKind::Sgd { momentum: 0.0 },
            learning_rate: 0.01,
        }
    }

    /// Adam at learning rate 0.001, β = (0.9, 0.999), ε = 1e-8.
    pub fn adam() -> Self {
        Self {
            kind: OptimizerKind::Adam {
                beta1: 0.9,
                beta2: 0.999,
                epsilon: 1e-8,
            },
            learning_rate: 0.001,
        }
    }

    /// RMSprop at learning rate 0.001, ρ = 0.9, ε = 1e-8.
    pub fn rmsprop() -> Self {
        Self {
            kind: OptimizerKind::RmsProp {
                rho: 0.9,
                epsilon: 1e-8,
            },
            learning_rate: 0.001,
        }
    }

    /// Default configuration for `sgd`, `adam` or `rmsprop`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "sgd" => Ok(Self::sgd()),
            "adam" => Ok(Self::adam()),
            "rmsprop" => Ok(Self::rmsprop()),
            other => Err(Error::invalid(format!("unknown optimizer `{other}`"))),
        }
    }

    pub fn with_learning_rate(mut self, lr: f64) -> Self {
        self.learning_rate = lr;
        self
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            OptimizerKind::Sgd { .. } => "sgd",
            OptimizerKind::Adam { .. } => "adam",
            OptimizerKind::RmsProp { .. } => "rmsprop",
        }
    }

    /// A zero learning rate is accepted so that a run can record the
    /// predictions of a frozen model.
    pub fn validate(&self) -> Result<()> {
        let lr = self.learning_rate;
        if !(lr.is_finite() && lr >= 0.0) {
            return Err(Error::invalid(format!("learning rate {lr} must be >= 0")));
        }
        let open_unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} = {v} must lie in (0, 1)")))
            }
        };
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} = {v} must be > 0")))
            }
        };
        match self.kind {
            OptimizerKind::Sgd { momentum } => {
                if !(0.0..1.0).contains(&momentum) {
                    return Err(Error::invalid(format!(
                        "momentum = {momentum} must lie in [0, 1)"
                    )));
                }
            }
            OptimizerKind::Adam {
                beta1,
                beta2,
                epsilon,
            } => {
                open_unit("beta1", beta1)?;
                open_unit("beta2", beta2)?;
                positive("epsilon", epsilon)?;
            }
            OptimizerKind::RmsProp { rho, epsilon } => {
                open_unit("rho", rho)?;
                positive("epsilon", epsilon)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for OptimizerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(lr={})", self.name(), self.learning_rate)
    }
}

/// Per-parameter optimizer buffers, zero-initialised.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    spec: OptimizerSpec,
    step: u64,
    /// velocity (sgd), first moment (adam); unused by rmsprop
    first: Vec<Vec<f64>>,
    /// second moment (adam), squared-gradient average (rmsprop)
    second: Vec<Vec<f64>>,
}

impl OptimizerState {
    /// Buffers for parameter tensors of the given lengths.
    pub fn new(spec: OptimizerSpec, sizes: &[usize]) -> Result<Self> {
        spec.validate()?;
        let zeros = || sizes.iter().map(|&n| vec![0.0; n]).collect();
        Ok(Self {
            spec,
            step: 0,
            first: zeros(),
            second: zeros(),
        })
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update to every parameter tensor in place.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != self.first.len() {
            return Err(Error::invalid(format!(
                "optimizer tracks {} tensors, got {} parameters and {} gradients",
                self.first.len(),
                params.len(),
                grads.len()
            )));
        }
        for (k, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != self.first[k].len() || g.len() != p.len() {
                return Err(Error::invalid(format!("shape mismatch in tensor {k}")));
            }
        }
        self.step += 1;
        let lr = self.spec.learning_rate;
        match self.spec.kind {
            OptimizerKind::Sgd { momentum } => {
                for ((p, g), v) in params.iter_mut().zip(grads).zip(&mut self.first) {
                    for ((p, &g), v) in p.iter_mut().zip(*g).zip(v) {
                        *v = momentum * *v - lr * g;
                        *p += *v;
                    }
                }
            }
            OptimizerKind::Adam {
                beta1,
                beta2,
                epsilon,
            } => {
                let t = self.step as i32;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                for (((p, g), m), v) in params
                    .iter_mut()
                    .zip(grads)
                    .zip(&mut self.first)
                    .zip(&mut self.second)
                {
                    for (((p, &g), m), v) in p.iter_mut().zip(*g).zip(m).zip(v) {
                        *m = beta1 * *m + (1.0 - beta1) * g;
                        *v = beta2 * *v + (1.0 - beta2) * g * g;
                        let m_hat = *m / c1;
                        let v_hat = *v / c2;
                        *p -= lr * m_hat / (v_hat.sqrt() + epsilon);
                    }
                }
            }
            OptimizerKind::RmsProp { rho, epsilon } => {
                for ((p, g), s) in params.iter_mut().zip(grads).zip(&mut self.second) {
                    for ((p, &g), s) in p.iter_mut().zip(*g).zip(s) {
                        *s = rho * *s + (1.0 - rho) * g * g;
                        *p -= lr * g / (*s + epsilon).sqrt();
                    }
                }
            }
        }
        Ok(())
    }
}
