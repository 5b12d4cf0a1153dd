//! Conjugate Gaussian inference for linear-regression weights.
//!
//! Beliefs are carried as `(mean, precision)`. With a Gaussian likelihood
//! `t | w ~ N(wᵀφ(x), σ²)` the posterior after one observation is
//!
//! ```text
//! precision' = precision + φ φᵀ / σ²
//! mean'      = precision'⁻¹ (precision · mean + φ t / σ²)
//! ```
//!
//! and folding that update over a dataset gives the same belief as the batch
//! formula `precision = Id/σ_w² + ΦᵀΦ/σ²`, `mean = precision⁻¹ Φᵀt / σ²`.
//! All solves go through a Cholesky factor; nothing is inverted explicitly.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::DesignMatrix;
use crate::error::{ensure_finite, Error, Result};
use crate::math::cholesky;

/// Observation noise and prior weight scale, shared by every hypothesis in a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    sigma: f64,
    sigma_w: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64, sigma_w: f64) -> Result<Self> {
        for (value, name) in [(sigma, "sigma"), (sigma_w, "sigma_w")] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Input(format!("{name} must be positive and finite, got {value}")));
            }
        }
        Ok(Self { sigma, sigma_w })
    }

    /// Observation noise standard deviation σ.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Prior weight standard deviation σ_w.
    pub fn sigma_w(&self) -> f64 {
        self.sigma_w
    }

    pub(crate) fn noise_precision(&self) -> f64 {
        1.0 / (self.sigma * self.sigma)
    }

    pub(crate) fn prior_precision(&self) -> f64 {
        1.0 / (self.sigma_w * self.sigma_w)
    }
}

/// A Gaussian distribution over the weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBelief {
    mean: DVector<f64>,
    precision: DMatrix<f64>,
}

impl GaussianBelief {
    /// Builds a belief after checking that `precision` is square, symmetric
    /// positive definite and matches `mean`.
    pub fn new(mean: DVector<f64>, precision: DMatrix<f64>) -> Result<Self> {
        if !precision.is_square() || precision.nrows() != mean.len() {
            return Err(Error::Dimension {
                what: "precision matrix size",
                expected: mean.len(),
                actual: precision.nrows(),
            });
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("belief mean must be finite".into()));
        }
        cholesky(&precision, "belief precision")?;
        Ok(Self { mean, precision })
    }

    /// Zero-mean prior `N(0, σ_w² Id)`.
    pub fn prior(dim: usize, noise: &NoiseModel) -> Self {
        Self {
            mean: DVector::zeros(dim),
            precision: DMatrix::identity(dim, dim) * noise.prior_precision(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    /// Posterior after one more observation `(φ, t)`; this belief acts as the prior.
    pub fn update_online(&self, phi: &DVector<f64>, t: f64, noise: &NoiseModel) -> Result<Self> {
        if phi.len() != self.dim() {
            return Err(Error::Dimension {
                what: "feature row length",
                expected: self.dim(),
                actual: phi.len(),
            });
        }
        ensure_finite(t, "target")?;
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("feature row must be finite".into()));
        }
        if phi.iter().all(|&v| v == 0.0) {
            return Ok(self.clone());
        }
        let beta = noise.noise_precision();
        let mut precision = self.precision.clone();
        precision.ger(beta, phi, phi, 1.0);
        let rhs = &self.precision * &self.mean + phi * (t * beta);
        let chol = cholesky(&precision, "updated precision")?;
        Ok(Self {
            mean: chol.solve(&rhs),
            precision,
        })
    }

    /// Posterior from the prior and a whole dataset at once.
    pub fn update_batch(design: &DesignMatrix, ts: &[f64], noise: &NoiseModel) -> Result<Self> {
        if design.rows() != ts.len() {
            return Err(Error::Dimension {
                what: "number of targets",
                expected: design.rows(),
                actual: ts.len(),
            });
        }
        let phi = design.matrix();
        let m = design.cols();
        let t = DVector::from_column_slice(ts);
        let beta = noise.noise_precision();
        let precision = phi.tr_mul(phi) * beta + DMatrix::identity(m, m) * noise.prior_precision();
        let rhs = phi.tr_mul(&t) * beta;
        let chol = cholesky(&precision, "posterior precision")?;
        Ok(Self {
            mean: chol.solve(&rhs),
            precision,
        })
    }

    /// The posterior mode, which for a Gaussian is its mean.
    pub fn map_estimate(&self) -> DVector<f64> {
        self.mean.clone()
    }
}

/// Least-squares weights `argmax_w p(t | w)`. Fails when `ΦᵀΦ` is singular;
/// the MAP estimate exists regardless.
pub fn ml_estimate(design: &DesignMatrix, ts: &[f64]) -> Result<DVector<f64>> {
    if design.rows() != ts.len() {
        return Err(Error::Dimension {
            what: "number of targets",
            expected: design.rows(),
            actual: ts.len(),
        });
    }
    if design.rows() < design.cols() {
        return Err(Error::MlUndefined);
    }
    let phi = design.matrix();
    let gram = phi.tr_mul(phi);
    let chol = cholesky(&gram, "gram matrix").map_err(|_| Error::MlUndefined)?;
    // Near-singular Gram matrices factor with vanishing pivots.
    let scale = gram.diagonal().max();
    let min_pivot = chol.l_dirty().diagonal().min();
    let well_conditioned = min_pivot * min_pivot > scale * 1e-13;
    if !well_conditioned {
        return Err(Error::MlUndefined);
    }
    Ok(chol.solve(&phi.tr_mul(&DVector::from_column_slice(ts))))
}
