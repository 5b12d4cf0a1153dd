//! Bernoulli count models compared through exact beta integrals or Laplace's method.

pub mod coin;
pub mod contingency;

pub use coin::{beta_log_evidence, coin_trajectory, parse_tosses, CoinPosterior, CoinState, Toss};
pub use contingency::{
    contingency_exact_log_evidence, contingency_laplace_log_evidence, contingency_log_evidence, contingency_map,
    contingency_model_posterior, laplace_boundary_notes, BoundaryNote, Cell, CellCounts, ContingencyCounts,
    ContingencyHypothesis, EvidenceMethod,
};
