use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts of `(x, y)` pairs on a uniform grid.
///
/// Points outside the grid (or NaN) are never dropped: they are tallied in
/// [`Histogram2D::overflow`], so `total() + overflow == input length`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram2D {
    x_edges: Vec<f64>,
    y_edges: Vec<f64>,
    /// row-major, `counts[ix * bins_y + iy]`
    counts: Vec<u64>,
    overflow: u64,
}

impl Histogram2D {
    pub fn x_edges(&self) -> &[f64] {
        &self.x_edges
    }

    pub fn y_edges(&self) -> &[f64] {
        &self.y_edges
    }

    pub fn bins_x(&self) -> usize {
        self.x_edges.len() - 1
    }

    pub fn bins_y(&self) -> usize {
        self.y_edges.len() - 1
    }

    pub fn count(&self, ix: usize, iy: usize) -> u64 {
        assert!(ix < self.bins_x() && iy < self.bins_y());
        self.counts[ix * self.bins_y() + iy]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Iterates `(x_lo, x_hi, y_lo, y_hi, count)` over every bin, x-major.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, f64, f64, u64)> + '_ {
        let by = self.bins_y();
        self.counts.iter().enumerate().map(move |(k, &c)| {
            let (ix, iy) = (k / by, k % by);
            (
                self.x_edges[ix],
                self.x_edges[ix + 1],
                self.y_edges[iy],
                self.y_edges[iy + 1],
                c,
            )
        })
    }
}

fn edges(bins: usize, (lo, hi): (f64, f64), axis: &str) -> Result<Vec<f64>> {
    if bins == 0 {
        return Err(Error::invalid(format!("{axis}: bin count must be >= 1")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(format!(
            "{axis}: invalid range [{lo}, {hi}]"
        )));
    }
    let width = (hi - lo) / bins as f64;
    let mut e: Vec<f64> = (0..bins).map(|k| lo + k as f64 * width).collect();
    e.push(hi);
    if e.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!(
            "{axis}: {bins} bins are too fine for range [{lo}, {hi}]"
        )));
    }
    Ok(e)
}

/// Bin index for `v`, with `hi` itself belonging to the last bin.
fn locate(v: f64, bins: usize, (lo, hi): (f64, f64)) -> Option<usize> {
    if !(lo..=hi).contains(&v) {
        return None;
    }
    let k = ((v - lo) / (hi - lo) * bins as f64).floor() as usize;
    Some(k.min(bins - 1))
}

pub fn histogram2d(
    x: &[f64],
    y: &[f64],
    bins_x: usize,
    bins_y: usize,
    range_x: (f64, f64),
    range_y: (f64, f64),
) -> Result<Histogram2D> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let x_edges = edges(bins_x, range_x, "x")?;
    let y_edges = edges(bins_y, range_y, "y")?;
    let mut counts = vec![0u64; bins_x * bins_y];
    let mut overflow = 0;
    for (&a, &b) in x.iter().zip(y) {
        match (locate(a, bins_x, range_x), locate(b, bins_y, range_y)) {
            (Some(ix), Some(iy)) => counts[ix * bins_y + iy] += 1,
            _ => overflow += 1,
        }
    }
    Ok(Histogram2D {
        x_edges,
        y_edges,
        counts,
        overflow,
    })
}
