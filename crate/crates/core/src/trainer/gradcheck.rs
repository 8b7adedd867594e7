//! Central-difference gradient checking against [`Mlp::loss`].

use super::model::Mlp;
use crate::error::Result;

/// Step used by the gradient suites.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Relative errors below this magnitude are measured against the floor
/// instead, so that entries that are zero analytically do not divide by ~0.
pub const RELATIVE_FLOOR: f64 = 1e-6;

/// Central differences `(L(θ+h) − L(θ−h)) / 2h` for every parameter, in
/// the same layout as [`super::Gradients::slices`].
pub fn numerical_gradients(
    model: &Mlp,
    inputs: &[f64],
    classes: &[usize],
    step: f64,
) -> Result<Vec<Vec<f64>>> {
    let mut probe = model.clone();
    let n_tensors = model.parameters().len();
    let mut out = Vec::with_capacity(n_tensors);
    for k in 0..n_tensors {
        let len = model.parameters()[k].len();
        let mut grad = Vec::with_capacity(len);
        for j in 0..len {
            let original = model.parameters()[k][j];
            probe.parameters_mut()[k][j] = original + step;
            let plus = probe.loss(inputs, classes)?;
            probe.parameters_mut()[k][j] = original - step;
            let minus = probe.loss(inputs, classes)?;
            probe.parameters_mut()[k][j] = original;
            grad.push((plus - minus) / (2.0 * step));
        }
        out.push(grad);
    }
    Ok(out)
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

/// Largest relative error between backprop and central differences.
pub fn max_relative_error(model: &Mlp, inputs: &[f64], classes: &[usize], step: f64) -> Result<f64> {
    let (analytic, _) = model.backward(inputs, classes)?;
    let numeric = numerical_gradients(model, inputs, classes, step)?;
    let mut worst: f64 = 0.0;
    for (a, n) in analytic.slices().iter().zip(&numeric) {
        for (&x, &y) in a.iter().zip(n) {
            worst = worst.max(relative_error(x, y));
        }
    }
    Ok(worst)
}
