use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, DifficultyTag};
use crate::error::{Error, Result};

/// Parameters of an isotropic Gaussian blob dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobParams {
    pub classes: usize,
    pub dim: usize,
    pub per_class: usize,
    /// Per-coordinate standard deviation around the class mean. Class means
    /// are pairwise [`MEAN_SEPARATION`] apart.
    pub spread: f64,
    pub label_noise: f64,
    pub seed: u64,
}

impl BlobParams {
    /// Named presets: `easy` (two well separated classes), `standard` (four
    /// overlapping classes with 8% label noise) and `hard`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "easy" => Ok(Self {
                classes: 2,
                dim: 2,
                per_class: 250,
                spread: 0.05,
                label_noise: 0.0,
                seed: 1,
            }),
            "standard" => Ok(Self {
                classes: 4,
                dim: 8,
                per_class: 500,
                spread: 0.6,
                label_noise: 0.08,
                seed: 7,
            }),
            "hard" => Ok(Self {
                classes: 4,
                dim: 8,
                per_class: 500,
                spread: 0.9,
                label_noise: 0.15,
                seed: 11,
            }),
            other => Err(Error::invalid(format!(
                "unknown preset `{other}` (expected easy, standard or hard)"
            ))),
        }
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["easy", "standard", "hard"]
    }

    fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::invalid("blobs need at least 2 classes"));
        }
        if self.per_class == 0 {
            return Err(Error::invalid("per_class must be >= 1"));
        }
        if self.dim + 1 < self.classes {
            return Err(Error::invalid(format!(
                "{} class means need at least {} dimensions",
                self.classes,
                self.classes - 1
            )));
        }
        if !(self.spread.is_finite() && self.spread > 0.0) {
            return Err(Error::invalid("spread must be a positive real"));
        }
        if !(0.0..1.0).contains(&self.label_noise) {
            return Err(Error::invalid("label noise fraction must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Pairwise distance between class means in [`make_blobs`]; with two
/// classes the means sit at -1 and +1 along one axis.
pub const MEAN_SEPARATION: f64 = 2.0;

/// Vertices of a regular simplex with the given edge length, embedded in the
/// first `classes - 1` of `dim` coordinates and centred on the origin.
pub fn simplex_means(classes: usize, dim: usize, edge: f64) -> Vec<Vec<f64>> {
    assert!(classes >= 2 && dim + 1 >= classes);
    let c = classes as f64;
    // e_k minus the centroid, in R^classes; pairwise distance sqrt(2)
    let centred: Vec<Vec<f64>> = (0..classes)
        .map(|k| {
            (0..classes)
                .map(|j| if j == k { 1.0 } else { 0.0 } - 1.0 / c)
                .collect()
        })
        .collect();

    // Orthonormal basis of their span (dimension classes - 1).
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(classes - 1);
    for v in centred.iter().take(classes - 1) {
        let mut u = v.clone();
        for b in &basis {
            let proj: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
            u.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
        }
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        u.iter_mut().for_each(|x| *x /= norm);
        basis.push(u);
    }

    let scale = edge * std::f64::consts::FRAC_1_SQRT_2;
    centred
        .iter()
        .map(|v| {
            let mut m = vec![0.0; dim];
            for (slot, b) in m.iter_mut().zip(&basis) {
                *slot = scale * v.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            }
            m
        })
        .collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Generates class-ordered Gaussian blobs with tagged difficulty.
///
/// Exactly `round(label_noise * N)` samples, chosen by a seeded shuffle,
/// receive a uniformly drawn wrong label and the `noisy` tag. Of the rest,
/// samples closer than `1.5 * spread` to some other class mean are tagged
/// `boundary`, all others `clean`.
pub fn make_blobs(params: &BlobParams) -> Result<Dataset> {
    params.validate()?;
    let BlobParams {
        classes,
        dim,
        per_class,
        spread,
        label_noise,
        seed,
    } = *params;
    let n = classes * per_class;
    let means = simplex_means(classes, dim, MEAN_SEPARATION);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, spread).map_err(|e| Error::invalid(e.to_string()))?;

    let mut features = Vec::with_capacity(n * dim);
    let mut true_class = Vec::with_capacity(n);
    for (k, mean) in means.iter().enumerate() {
        for _ in 0..per_class {
            features.extend(mean.iter().map(|&m| m + normal.sample(&mut rng)));
            true_class.push(k);
        }
    }

    let mut tags: Vec<DifficultyTag> = (0..n)
        .map(|i| {
            let row = &features[i * dim..(i + 1) * dim];
            let nearest_foreign = means
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != true_class[i])
                .map(|(_, m)| distance(row, m))
                .fold(f64::INFINITY, f64::min);
            if nearest_foreign < 1.5 * spread {
                DifficultyTag::Boundary
            } else {
                DifficultyTag::Clean
            }
        })
        .collect();

    let mut labels: Vec<u32> = true_class.iter().map(|&k| k as u32 + 1).collect();
    let n_noisy = (label_noise * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for &i in &order[..n_noisy] {
        let offset = rng.gen_range(1..classes);
        labels[i] = ((true_class[i] + offset) % classes) as u32 + 1;
        tags[i] = DifficultyTag::Noisy;
    }

    let width = n.to_string().len();
    let sample_ids = (0..n).map(|i| format!("blob-{i:0width$}")).collect();
    Dataset::new(features, dim, labels, classes, sample_ids, Some(tags))
}
