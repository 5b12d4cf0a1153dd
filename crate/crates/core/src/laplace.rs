//! Evidence by Laplace's method.
//!
//! For a log-joint `ln p(t|w) + ln p(w)` with mode `w*` and negative Hessian
//! `A` there,
//!
//! ```text
//! ln p(t) ≈ ln p(t|w*) + ln p(w*) − ½ ln det A + (d/2) ln 2π
//! ```
//!
//! The log-determinant comes from the Cholesky diagonal. For the Gaussian
//! linear model the integrand is itself Gaussian and the approximation is
//! exact; [`gaussian_exact_log_evidence`] provides the marginal-likelihood
//! route through the `N × N` covariance `σ²Id + σ_w²ΦΦᵀ` as an independent
//! check.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::DesignMatrix;
use crate::error::{ensure_finite, Error, Result};
use crate::gaussian_posterior::{GaussianBelief, NoiseModel};
use crate::math::{cholesky, log_det_from_cholesky, LN_2PI};

/// Natural logarithm of an evidence `p(t | H)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogEvidence(pub f64);

impl LogEvidence {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for LogEvidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Log-joint at the mode plus the negative log-posterior Hessian there.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceInput {
    pub log_joint_at_map: f64,
    pub hessian: DMatrix<f64>,
}

impl LaplaceInput {
    pub fn dim(&self) -> usize {
        self.hessian.nrows()
    }
}

pub fn laplace_log_evidence(input: &LaplaceInput) -> Result<LogEvidence> {
    ensure_finite(input.log_joint_at_map, "log joint at MAP")?;
    if !input.hessian.is_square() {
        return Err(Error::Dimension {
            what: "Hessian must be square",
            expected: input.hessian.nrows(),
            actual: input.hessian.ncols(),
        });
    }
    let chol = cholesky(&input.hessian, "Laplace Hessian").map_err(|_| Error::LaplaceInvalid)?;
    let d = input.dim() as f64;
    let value = input.log_joint_at_map - 0.5 * log_det_from_cholesky(&chol) + 0.5 * d * LN_2PI;
    if !value.is_finite() {
        return Err(Error::LaplaceInvalid);
    }
    Ok(LogEvidence(value))
}

/// `A = ΦᵀΦ/σ² + Id/σ_w²`; independent of the weights.
pub fn regression_hessian(design: &DesignMatrix, noise: &NoiseModel) -> DMatrix<f64> {
    let phi = design.matrix();
    let m = design.cols();
    phi.tr_mul(phi) * noise.noise_precision() + DMatrix::identity(m, m) * noise.prior_precision()
}

/// `ln p(t | w) + ln p(w)` for the Gaussian linear model with prior `N(0, σ_w² Id)`.
pub fn regression_log_joint(design: &DesignMatrix, ts: &[f64], w: &DVector<f64>, noise: &NoiseModel) -> Result<f64> {
    check_dims(design, ts)?;
    if w.len() != design.cols() {
        return Err(Error::Dimension {
            what: "weight vector length",
            expected: design.cols(),
            actual: w.len(),
        });
    }
    let n = ts.len() as f64;
    let m = w.len() as f64;
    let residual = DVector::from_column_slice(ts) - design.matrix() * w;
    let sigma2 = noise.sigma().powi(2);
    let sigma_w2 = noise.sigma_w().powi(2);
    let log_lik = -0.5 * n * (LN_2PI + sigma2.ln()) - residual.norm_squared() / (2.0 * sigma2);
    let log_prior = -0.5 * m * (LN_2PI + sigma_w2.ln()) - w.norm_squared() / (2.0 * sigma_w2);
    Ok(log_lik + log_prior)
}

/// Laplace evidence for the Gaussian linear model, evaluated at the MAP from
/// the batch posterior.
pub fn regression_laplace_log_evidence(design: &DesignMatrix, ts: &[f64], noise: &NoiseModel) -> Result<LogEvidence> {
    let w = GaussianBelief::update_batch(design, ts, noise)?.map_estimate();
    laplace_log_evidence(&LaplaceInput {
        log_joint_at_map: regression_log_joint(design, ts, &w, noise)?,
        hessian: regression_hessian(design, noise),
    })
}

/// `ln N(t; 0, σ²Id + σ_w²ΦΦᵀ)`: the marginal likelihood in closed form.
pub fn gaussian_exact_log_evidence(design: &DesignMatrix, ts: &[f64], noise: &NoiseModel) -> Result<LogEvidence> {
    check_dims(design, ts)?;
    let n = ts.len();
    if n == 0 {
        return Ok(LogEvidence(0.0));
    }
    let phi = design.matrix();
    let cov = phi * phi.transpose() * noise.sigma_w().powi(2) + DMatrix::identity(n, n) * noise.sigma().powi(2);
    let chol = cholesky(&cov, "marginal covariance")?;
    let t = DVector::from_column_slice(ts);
    let quad = t.dot(&chol.solve(&t));
    Ok(LogEvidence(
        -0.5 * quad - 0.5 * log_det_from_cholesky(&chol) - 0.5 * n as f64 * LN_2PI,
    ))
}

fn check_dims(design: &DesignMatrix, ts: &[f64]) -> Result<()> {
    if design.rows() != ts.len() {
        return Err(Error::Dimension {
            what: "number of targets",
            expected: design.rows(),
            actual: ts.len(),
        });
    }
    Ok(())
}

/// Running sufficient statistics `ΦᵀΦ`, `Φᵀt`, `Σt²` for one basis family.
///
/// The evidence is assembled from these alone, so a streaming consumer never
/// rescans raw data.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionStats {
    gram: DMatrix<f64>,
    phi_t: DVector<f64>,
    tt: f64,
    n: usize,
}

impl RegressionStats {
    pub fn new(dim: usize) -> Self {
        Self {
            gram: DMatrix::zeros(dim, dim),
            phi_t: DVector::zeros(dim),
            tt: 0.0,
            n: 0,
        }
    }

    pub fn from_data(design: &DesignMatrix, ts: &[f64]) -> Result<Self> {
        check_dims(design, ts)?;
        let phi = design.matrix();
        let t = DVector::from_column_slice(ts);
        Ok(Self {
            gram: phi.tr_mul(phi),
            phi_t: phi.tr_mul(&t),
            tt: t.norm_squared(),
            n: ts.len(),
        })
    }

    pub fn dim(&self) -> usize {
        self.phi_t.len()
    }

    /// Accumulated `ΦᵀΦ`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Accumulated `Φᵀt`.
    pub fn phi_t(&self) -> &DVector<f64> {
        &self.phi_t
    }

    /// Accumulated `Σ t²`.
    pub fn tt(&self) -> f64 {
        self.tt
    }

    pub fn count(&self) -> usize {
        self.n
    }

    /// Rank-1 / vector / scalar update for one observation.
    pub fn observe(&mut self, phi: &DVector<f64>, t: f64) -> Result<()> {
        if phi.len() != self.dim() {
            return Err(Error::Dimension {
                what: "feature row length",
                expected: self.dim(),
                actual: phi.len(),
            });
        }
        self.gram.ger(1.0, phi, phi, 1.0);
        self.phi_t.axpy(t, phi, 1.0);
        self.tt += t * t;
        self.n += 1;
        Ok(())
    }

    /// `ΦᵀΦ/σ² + Id/σ_w²` from the accumulated Gram matrix.
    pub fn hessian(&self, noise: &NoiseModel) -> DMatrix<f64> {
        let m = self.dim();
        &self.gram * noise.noise_precision() + DMatrix::identity(m, m) * noise.prior_precision()
    }

    /// Laplace (here exact) log evidence from the statistics alone.
    pub fn log_evidence(&self, noise: &NoiseModel) -> Result<LogEvidence> {
        if self.n == 0 {
            return Ok(LogEvidence(0.0));
        }
        let hessian = self.hessian(noise);
        let chol = cholesky(&hessian, "posterior precision")?;
        let b = &self.phi_t * noise.noise_precision();
        let w = chol.solve(&b);
        // At the mode, |t − Φw|²/σ² + |w|²/σ_w² collapses to tᵀt/σ² − wᵀΦᵀt/σ².
        let misfit = (self.tt * noise.noise_precision() - w.dot(&b)).max(0.0);
        let n = self.n as f64;
        let m = self.dim() as f64;
        let log_joint = -0.5 * misfit
            - 0.5 * n * (LN_2PI + noise.sigma().powi(2).ln())
            - 0.5 * m * (LN_2PI + noise.sigma_w().powi(2).ln());
        laplace_log_evidence(&LaplaceInput {
            log_joint_at_map: log_joint,
            hessian,
        })
    }
}
