//! Bayesian parameter inference and model selection.
//!
//! Competing hypotheses are compared by their evidence `p(t | H)`, the
//! likelihood with parameters integrated out against their prior. The
//! integral is evaluated by Laplace's method, which is exact for the
//! Gaussian linear-regression models in [`selection`] and approximate for
//! the Bernoulli count models in [`bernoulli`]. Everything is carried in
//! log space.
//!
//! - [`basis`]: polynomial and trigonometric feature maps, design matrices
//! - [`gaussian_posterior`]: conjugate batch and online weight posteriors
//! - [`laplace`]: Laplace evidence and the closed-form Gaussian marginal
//! - [`bernoulli`]: fair-vs-bent coin and the 2×2 contingency hypotheses
//! - [`selection`]: streaming model posterior over a hypothesis registry
//! - [`datagen`]: seeded synthetic scenarios and CSV ingestion

pub mod basis;
pub mod bernoulli;
pub mod datagen;
pub mod error;
pub mod gaussian_posterior;
pub mod laplace;
pub mod math;
pub mod selection;

pub use basis::{parse_hypothesis_set, BasisFamily, BasisKind, DesignMatrix};
pub use datagen::{generate, generate_coin, Dataset, GeneratorSpec, Preset, XOrdering, XSampling};
pub use error::{Error, Result};
pub use gaussian_posterior::{ml_estimate, GaussianBelief, NoiseModel};
pub use laplace::{
    gaussian_exact_log_evidence, laplace_log_evidence, regression_hessian, regression_laplace_log_evidence,
    LaplaceInput, LogEvidence, RegressionStats,
};
pub use selection::{run_registry, run_selection, Hypothesis, Registry, SelectionStep, SelectionTrajectory};
