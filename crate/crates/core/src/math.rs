//! Log-space helpers shared by every evidence computation.
//!
//! Evidences for realistic datasets are far below the smallest positive
//! `f64`, so everything is carried as natural logarithms and normalized with
//! a max-shift before exponentiating.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

/// `ln(2π)`.
pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `ln Σ exp(v_i)` with a max-shift. Returns `-inf` for an empty slice or when
/// every entry is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max.is_infinite() || max.is_nan() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Turns unnormalized log weights into probabilities (softmax).
///
/// Entries equal to `-inf` receive probability exactly zero. If every entry
/// is `-inf` the result is all `NaN`, since there is nothing to normalize.
pub fn normalize_log_weights(log_weights: &[f64]) -> Vec<f64> {
    let total = log_sum_exp(log_weights);
    let mut probs: Vec<f64> = log_weights.iter().map(|w| (w - total).exp()).collect();
    // One renormalization pass removes the last few ulps of drift.
    let sum: f64 = probs.iter().sum();
    if sum.is_finite() && sum > 0.0 {
        probs.iter_mut().for_each(|p| *p /= sum);
    }
    probs
}

/// Logistic function, evaluated without overflow for large `|x|`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn cholesky(matrix: &DMatrix<f64>, what: &'static str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(matrix.clone()).ok_or(Error::NotPositiveDefinite(what))
}

/// `ln det` of a symmetric positive-definite matrix from its Cholesky factor.
pub fn log_det_spd(matrix: &DMatrix<f64>) -> Result<f64> {
    let chol = cholesky(matrix, "log-determinant")?;
    Ok(log_det_from_cholesky(&chol))
}

pub(crate) fn log_det_from_cholesky(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}
