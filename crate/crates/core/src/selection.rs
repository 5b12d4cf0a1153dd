//! Streaming model selection over a registry of regression hypotheses.
//!
//! Each hypothesis keeps its own Gaussian weight belief and the running
//! sufficient statistics `ΦᵀΦ`, `Φᵀt`, `Σt²`. Parameter inference is online,
//! but model comparison is not: the evidence after `n` points is recomputed
//! from the statistics of all `n` points, never by chaining one-step
//! predictive ratios of the hypotheses' priors.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::basis::{parse_hypothesis_set, BasisFamily};
use crate::datagen::Dataset;
use crate::error::{ensure_finite, Error, Result};
use crate::gaussian_posterior::{GaussianBelief, NoiseModel};
use crate::laplace::{LogEvidence, RegressionStats};
use crate::math::{log_sum_exp, normalize_log_weights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub label: String,
    pub family: BasisFamily,
    pub log_prior: f64,
}

/// Belief and sufficient statistics for one hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisState {
    belief: GaussianBelief,
    stats: RegressionStats,
}

impl HypothesisState {
    fn new(dim: usize, noise: &NoiseModel) -> Self {
        Self {
            belief: GaussianBelief::prior(dim, noise),
            stats: RegressionStats::new(dim),
        }
    }

    pub fn belief(&self) -> &GaussianBelief {
        &self.belief
    }

    pub fn stats(&self) -> &RegressionStats {
        &self.stats
    }

    pub fn n_seen(&self) -> usize {
        self.stats.count()
    }
}

/// The set of competing hypotheses and their per-hypothesis state.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    noise: NoiseModel,
    hypotheses: Vec<Hypothesis>,
    states: Vec<HypothesisState>,
}

impl Registry {
    /// Registry from a hypothesis-set string (e.g. `poly:0..3,trig:1..3`) with
    /// equal model priors.
    pub fn from_spec(spec: &str, noise: NoiseModel) -> Result<Self> {
        Self::with_uniform_prior(parse_hypothesis_set(spec)?, noise)
    }

    pub fn with_uniform_prior(families: Vec<BasisFamily>, noise: NoiseModel) -> Result<Self> {
        let priors = vec![0.0; families.len()];
        Self::with_log_priors(families, &priors, noise)
    }

    /// Registry with explicit (possibly unnormalized) log priors. Priors are
    /// normalized so that they log-sum-exp to zero.
    pub fn with_log_priors(families: Vec<BasisFamily>, log_priors: &[f64], noise: NoiseModel) -> Result<Self> {
        if families.is_empty() {
            return Err(Error::Config {
                token: String::new(),
                reason: "at least one hypothesis is required".into(),
            });
        }
        if log_priors.len() != families.len() {
            return Err(Error::Dimension {
                what: "number of log priors",
                expected: families.len(),
                actual: log_priors.len(),
            });
        }
        if log_priors.iter().any(|p| p.is_nan() || *p == f64::INFINITY) {
            return Err(Error::Input("log priors must be finite or -inf".into()));
        }
        let total = log_sum_exp(log_priors);
        if !total.is_finite() {
            return Err(Error::Input("at least one hypothesis needs a positive prior".into()));
        }
        let mut labels = std::collections::HashSet::new();
        let mut hypotheses = Vec::with_capacity(families.len());
        for (family, &prior) in families.into_iter().zip(log_priors) {
            let label = family.label();
            if !labels.insert(label.clone()) {
                return Err(Error::Config {
                    token: label,
                    reason: "duplicate hypothesis label".into(),
                });
            }
            hypotheses.push(Hypothesis {
                label,
                family,
                log_prior: prior - total,
            });
        }
        let states = hypotheses
            .iter()
            .map(|h| HypothesisState::new(h.family.dimension(), &noise))
            .collect();
        Ok(Self {
            noise,
            hypotheses,
            states,
        })
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn states(&self) -> &[HypothesisState] {
        &self.states
    }

    pub fn labels(&self) -> Vec<String> {
        self.hypotheses.iter().map(|h| h.label.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    /// Number of observations absorbed so far.
    pub fn n_seen(&self) -> usize {
        self.states[0].n_seen()
    }

    /// Absorbs one data point into every hypothesis. On error the registry is
    /// left unchanged.
    pub fn observe(&mut self, x: f64, t: f64) -> Result<()> {
        ensure_finite(x, "x")?;
        ensure_finite(t, "t")?;
        let mut next = Vec::with_capacity(self.states.len());
        for (hyp, state) in self.hypotheses.iter().zip(&self.states) {
            let phi = hyp.family.evaluate(x)?;
            let belief = state.belief.update_online(&phi, t, &self.noise)?;
            let mut stats = state.stats.clone();
            stats.observe(&phi, t)?;
            next.push(HypothesisState { belief, stats });
        }
        self.states = next;
        Ok(())
    }

    /// Log evidence of every hypothesis given all data observed so far.
    pub fn log_evidences(&self) -> Result<Vec<LogEvidence>> {
        self.states.iter().map(|s| s.stats.log_evidence(&self.noise)).collect()
    }

    /// `p(H_k | t)` for every hypothesis.
    pub fn posterior(&self) -> Result<Vec<f64>> {
        let evidences = self.log_evidences()?;
        Ok(self.posterior_from(&evidences))
    }

    fn posterior_from(&self, evidences: &[LogEvidence]) -> Vec<f64> {
        let weights: Vec<f64> = self
            .hypotheses
            .iter()
            .zip(evidences)
            .map(|(h, e)| h.log_prior + e.value())
            .collect();
        normalize_log_weights(&weights)
    }

    fn snapshot(&self) -> Result<SelectionStep> {
        let log_evidences = self.log_evidences()?;
        let posterior = self.posterior_from(&log_evidences);
        Ok(SelectionStep {
            n: self.n_seen(),
            log_evidences,
            posterior,
        })
    }
}

/// Model posterior after the first `n` data points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub n: usize,
    pub log_evidences: Vec<LogEvidence>,
    pub posterior: Vec<f64>,
}

/// Posterior over hypotheses after each prefix of the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrajectory {
    pub labels: Vec<String>,
    pub dimensions: Vec<usize>,
    pub steps: Vec<SelectionStep>,
}

impl SelectionTrajectory {
    pub fn final_step(&self) -> Option<&SelectionStep> {
        self.steps.last()
    }

    /// Index of the leading hypothesis at step `index`: highest posterior,
    /// then fewer parameters, then lexicographic label.
    pub fn leader_at(&self, index: usize) -> Option<usize> {
        let step = self.steps.get(index)?;
        Some(leader(&step.posterior, &self.dimensions, &self.labels))
    }

    pub fn winner(&self) -> Option<usize> {
        self.leader_at(self.steps.len().checked_sub(1)?)
    }

    /// CSV with header `n,<label1>,<label2>,…` and one posterior row per step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n");
        for label in &self.labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for step in &self.steps {
            write!(out, "{}", step.n).unwrap();
            for p in &step.posterior {
                write!(out, ",{p:e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// JSON including log evidences.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory serializes")
    }
}

pub fn leader(posterior: &[f64], dimensions: &[usize], labels: &[String]) -> usize {
    (0..posterior.len())
        .min_by(|&a, &b| {
            posterior[b]
                .partial_cmp(&posterior[a])
                .unwrap_or(Ordering::Equal)
                .then(dimensions[a].cmp(&dimensions[b]))
                .then(labels[a].cmp(&labels[b]))
        })
        .expect("non-empty registry")
}

/// Feeds `dataset` through a fresh registry, recording the model posterior
/// after every point.
pub fn run_selection(spec: &str, dataset: &Dataset, noise: NoiseModel) -> Result<SelectionTrajectory> {
    run_registry(Registry::from_spec(spec, noise)?, dataset)
}

pub fn run_registry(mut registry: Registry, dataset: &Dataset) -> Result<SelectionTrajectory> {
    if dataset.is_empty() {
        return Err(Error::Input("dataset is empty".into()));
    }
    let mut steps = Vec::with_capacity(dataset.len());
    for (row, &(x, t)) in dataset.pairs().iter().enumerate() {
        let at_row = |e: Error| Error::AtRow {
            row,
            source: Box::new(e),
        };
        registry.observe(x, t).map_err(at_row)?;
        steps.push(registry.snapshot().map_err(at_row)?);
    }
    Ok(SelectionTrajectory {
        labels: registry.labels(),
        dimensions: registry.hypotheses.iter().map(|h| h.family.dimension()).collect(),
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace::gaussian_exact_log_evidence;
    use proptest::prelude::*;

    fn noise(s: f64, sw: f64) -> NoiseModel {
        NoiseModel::new(s, sw).unwrap()
    }

    #[test]
    fn registry_examples() {
        let r = Registry::from_spec("poly:0..2", noise(0.1, 10.0)).unwrap();
        assert_eq!(r.labels(), ["Poly0", "Poly1", "Poly2"]);
        for h in r.hypotheses() {
            assert!((h.log_prior - (1.0f64 / 3.0).ln()).abs() < 1e-15);
        }
        let r = Registry::from_spec("poly:0..3,trig:1..3", noise(0.1, 10.0)).unwrap();
        assert_eq!(r.len(), 7);
        let p = r.posterior().unwrap();
        assert!(p.iter().all(|&v| (v - 1.0 / 7.0).abs() < 1e-15));

        let err = Registry::from_spec("poly:2..1", noise(0.1, 10.0)).unwrap_err();
        assert!(err.to_string().contains("empty range"));
        assert!(Registry::from_spec("", noise(0.1, 10.0)).is_err());
    }

    #[test]
    fn custom_priors_are_normalized() {
        let fams = vec![BasisFamily::poly_degree(0), BasisFamily::poly_degree(1)];
        let r = Registry::with_log_priors(fams.clone(), &[1.0, 1.0 + 3f64.ln()], noise(1.0, 1.0)).unwrap();
        let p = r.posterior().unwrap();
        assert!((p[0] - 0.25).abs() < 1e-15 && (p[1] - 0.75).abs() < 1e-15);
        assert!(Registry::with_log_priors(fams.clone(), &[f64::NEG_INFINITY; 2], noise(1.0, 1.0)).is_err());
        assert!(Registry::with_log_priors(vec![fams[0], fams[0]], &[0.0, 0.0], noise(1.0, 1.0)).is_err());
    }

    #[test]
    fn observe_updates_every_hypothesis() {
        let mut r = Registry::from_spec("poly:0..2", noise(1.0, 1.0)).unwrap();
        r.observe(0.3, 5.0).unwrap();
        // 1-d conjugate posterior mean: 5 / (1 + 1)
        assert!((r.states()[0].belief().map_estimate()[0] - 2.5).abs() < 1e-14);
        for _ in 0..4 {
            r.observe(0.1, 1.0).unwrap();
        }
        assert!(r.states().iter().all(|s| s.n_seen() == 5));
    }

    #[test]
    fn observe_rejects_non_finite_without_side_effects() {
        let mut r = Registry::from_spec("poly:0..1", noise(1.0, 1.0)).unwrap();
        r.observe(0.5, 1.0).unwrap();
        let before = r.clone();
        assert!(r.observe(f64::NAN, 1.0).is_err());
        assert!(r.observe(0.0, f64::INFINITY).is_err());
        assert_eq!(r, before);
    }

    #[test]
    fn observation_order_does_not_matter() {
        let mut a = Registry::from_spec("poly:0..3,trig:1..2", noise(0.3, 2.0)).unwrap();
        let mut b = a.clone();
        a.observe(0.2, 1.0).unwrap();
        a.observe(-0.7, 0.4).unwrap();
        b.observe(-0.7, 0.4).unwrap();
        b.observe(0.2, 1.0).unwrap();
        for (sa, sb) in a.states().iter().zip(b.states()) {
            assert!((sa.belief().mean() - sb.belief().mean()).amax() < 1e-10);
            assert!((sa.belief().precision() - sb.belief().precision()).amax() < 1e-10);
        }
        let (ea, eb) = (a.log_evidences().unwrap(), b.log_evidences().unwrap());
        for (x, y) in ea.iter().zip(&eb) {
            assert!((x.value() - y.value()).abs() < 1e-10);
        }
    }

    #[test]
    fn no_data_means_zero_evidence_and_prior_posterior() {
        let r = Registry::from_spec("poly:0..5", noise(0.1, 10.0)).unwrap();
        assert!(r.log_evidences().unwrap().iter().all(|e| e.value() == 0.0));
        let p = r.posterior().unwrap();
        assert!(p.iter().all(|&v| v == 1.0 / 6.0 || (v - 1.0 / 6.0).abs() < 1e-16));
    }

    #[test]
    fn occam_prefers_constant_for_constant_data() {
        let mut r = Registry::from_spec("poly:0..5", noise(0.1, 10.0)).unwrap();
        for i in 0..20 {
            r.observe(-1.0 + 0.1 * i as f64, 3.0).unwrap();
        }
        let ev = r.log_evidences().unwrap();
        assert!(ev[0].value() > ev[5].value());
        assert_eq!(leader(&r.posterior().unwrap(), &[1, 2, 3, 4, 5, 6], &r.labels()), 0);
    }

    #[test]
    fn single_hypothesis_has_probability_one() {
        let ds = Dataset::new(vec![(0.0, 1.0), (0.5, 2.0), (1.0, 0.5)]).unwrap();
        let traj = run_selection("poly:0..0", &ds, noise(0.1, 10.0)).unwrap();
        assert!(traj.steps.iter().all(|s| s.posterior == vec![1.0]));
    }

    #[test]
    fn one_point_run() {
        let ds = Dataset::new(vec![(0.4, 1.2)]).unwrap();
        let nm = noise(0.5, 2.0);
        let traj = run_selection("poly:0..2", &ds, nm).unwrap();
        assert_eq!(traj.steps.len(), 1);
        let direct: Vec<f64> = (0..3)
            .map(|k| {
                let d = BasisFamily::poly_degree(k).design_matrix(&[0.4]).unwrap();
                gaussian_exact_log_evidence(&d, &[1.2], &nm).unwrap().value()
            })
            .collect();
        let expected = normalize_log_weights(&direct);
        for (a, b) in traj.steps[0].posterior.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let ds = Dataset::new(vec![]).unwrap();
        assert!(run_selection("poly:0..1", &ds, noise(0.1, 1.0)).is_err());
    }

    #[test]
    fn tie_breaking() {
        let labels: Vec<String> = ["Poly2", "Poly1", "Trig1"].iter().map(|s| s.to_string()).collect();
        assert_eq!(leader(&[0.4, 0.4, 0.2], &[3, 2, 3], &labels), 1);
        assert_eq!(leader(&[0.4, 0.2, 0.4], &[3, 2, 3], &labels), 0);
        assert_eq!(leader(&[0.1, 0.2, 0.7], &[3, 2, 3], &labels), 2);
    }

    #[test]
    fn csv_layout() {
        let ds = Dataset::new(vec![(0.0, 1.0), (1.0, 1.0)]).unwrap();
        let traj = run_selection("poly:0..1", &ds, noise(0.1, 10.0)).unwrap();
        let csv = traj.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,Poly0,Poly1");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("2,"));
        let json: serde_json::Value = serde_json::from_str(&traj.to_json()).unwrap();
        assert_eq!(json["steps"][1]["log_evidences"].as_array().unwrap().len(), 2);
    }

    fn dataset() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-1f64..1.0, -3f64..3.0), 1..100)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn trajectory_is_normalized_and_matches_oracle(pairs in dataset(), s in 0.1f64..3.0, sw in 0.5f64..10.0) {
            let nm = noise(s, sw);
            let ds = Dataset::new(pairs.clone()).unwrap();
            let spec = "poly:0..3,trig:1..4";
            let traj = run_selection(spec, &ds, nm).unwrap();
            for step in &traj.steps {
                prop_assert!((step.posterior.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            let (xs, ts): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            let families = parse_hypothesis_set(spec).unwrap();
            let last = traj.final_step().unwrap();
            for (fam, ev) in families.iter().zip(&last.log_evidences) {
                let oracle = gaussian_exact_log_evidence(&fam.design_matrix(&xs).unwrap(), &ts, &nm).unwrap().value();
                prop_assert!((ev.value() - oracle).abs() <= 1e-8 * oracle.abs().max(1.0), "{} vs {}", ev.value(), oracle);
            }
        }

        #[test]
        fn prefix_runs_reproduce_trajectory_steps(pairs in dataset(), cut in 1usize..100) {
            let nm = noise(0.2, 5.0);
            let full = run_selection("poly:0..2,trig:1..1", &Dataset::new(pairs.clone()).unwrap(), nm).unwrap();
            let cut = cut.min(pairs.len());
            let prefix = run_selection("poly:0..2,trig:1..1", &Dataset::new(pairs[..cut].to_vec()).unwrap(), nm).unwrap();
            prop_assert_eq!(&prefix.steps[..], &full.steps[..cut]);
        }
    }
}
