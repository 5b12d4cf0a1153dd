//! Fair coin (`H₀`) against a bent coin with uniform bias (`H₁`).
//!
//! Outcome `0` is "heads". Under `H₁` the chance of a zero is `r ~ U(0, 1)`,
//! so the evidence of a sequence with `K` zeros out of `N` is the beta
//! integral `K!(N−K)!/(N+1)!`, while `H₀` assigns every sequence `2^{−N}`.
//! Posteriors are stored as `ln p(H₀|t) − ln p(H₁|t)`.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::laplace::LogEvidence;
use crate::math::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Toss {
    /// Outcome `0` ("heads").
    Zero,
    /// Outcome `1` ("tails").
    One,
}

impl Toss {
    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(Toss::Zero),
            1 => Ok(Toss::One),
            other => Err(Error::Input(format!("toss must be 0 or 1, got {other}"))),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Toss::Zero => '0',
            Toss::One => '1',
        }
    }
}

impl fmt::Display for Toss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Parses a stream of `0`/`1` characters; whitespace is ignored. The error
/// position is the 1-based character offset in the input.
pub fn parse_tosses(input: &str) -> Result<Vec<Toss>> {
    input
        .chars()
        .enumerate()
        .filter(|(_, c)| !c.is_whitespace())
        .map(|(i, c)| match c {
            '0' => Ok(Toss::Zero),
            '1' => Ok(Toss::One),
            other => Err(Error::Input(format!("invalid toss {other:?} at position {}", i + 1))),
        })
        .collect()
}

/// Sufficient statistics of a toss sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoinState {
    n_total: u64,
    n_zeros: u64,
}

impl CoinState {
    pub fn new(n_total: u64, n_zeros: u64) -> Result<Self> {
        if n_zeros > n_total {
            return Err(Error::Input(format!(
                "number of zeros ({n_zeros}) exceeds number of tosses ({n_total})"
            )));
        }
        Ok(Self { n_total, n_zeros })
    }

    pub fn from_tosses(tosses: &[Toss]) -> Self {
        let zeros = tosses.iter().filter(|&&t| t == Toss::Zero).count() as u64;
        Self {
            n_total: tosses.len() as u64,
            n_zeros: zeros,
        }
    }

    pub fn n_total(&self) -> u64 {
        self.n_total
    }

    pub fn n_zeros(&self) -> u64 {
        self.n_zeros
    }

    pub fn push(self, toss: Toss) -> Self {
        Self {
            n_total: self.n_total + 1,
            n_zeros: self.n_zeros + u64::from(toss == Toss::Zero),
        }
    }
}

/// `ln ∫₀¹ r^K (1−r)^{N−K} dr = −ln(N+1) − ln C(N, K)`, via log-factorials.
pub fn beta_log_evidence(k: u64, n: u64) -> Result<LogEvidence> {
    if k > n {
        return Err(Error::Input(format!("K = {k} exceeds N = {n}")));
    }
    Ok(LogEvidence(ln_factorial(k) + ln_factorial(n - k) - ln_factorial(n + 1)))
}

/// Posterior over the two coin hypotheses, as log odds in favour of `H₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinPosterior {
    log_odds_fair: f64,
}

impl CoinPosterior {
    pub fn from_log_odds(log_odds_fair: f64) -> Self {
        Self { log_odds_fair }
    }

    /// Prior with `p(H₀) = p_fair`.
    pub fn from_prior_probability(p_fair: f64) -> Result<Self> {
        if !(p_fair > 0.0 && p_fair < 1.0) {
            return Err(Error::Input(format!("prior probability must lie in (0, 1), got {p_fair}")));
        }
        Ok(Self {
            log_odds_fair: p_fair.ln() - (1.0 - p_fair).ln(),
        })
    }

    /// Batch posterior from counts alone.
    pub fn batch(state: CoinState, prior_log_odds: f64) -> Self {
        let n = state.n_total;
        let log_fair = -(n as f64) * std::f64::consts::LN_2;
        let log_bent = beta_log_evidence(state.n_zeros, n)
            .expect("CoinState guarantees K <= N")
            .value();
        Self {
            log_odds_fair: prior_log_odds + log_fair - log_bent,
        }
    }

    /// Quasi-iterative update: multiplies the odds by the ratio of one-step
    /// predictive probabilities, `(N+2)/(2K+2)` for a zero and
    /// `(N+2)/(2(N+1−K))` for a one. Only the counts are needed.
    pub fn update_quasi_iterative(self, state: CoinState, toss: Toss) -> (Self, CoinState) {
        let n = state.n_total as f64;
        let k = state.n_zeros as f64;
        let factor = match toss {
            Toss::Zero => (n + 2.0) / (2.0 * k + 2.0),
            Toss::One => (n + 2.0) / (2.0 * (n + 1.0 - k)),
        };
        (
            Self {
                log_odds_fair: self.log_odds_fair + factor.ln(),
            },
            state.push(toss),
        )
    }

    /// The invalid "naive" online model selection: it multiplies by
    /// `p(t'|H₀) / p(t'|H₁)` as if tosses were marginally independent. Both
    /// marginals equal ½, so the posterior never moves away from the prior.
    ///
    /// Kept as an executable counterexample; do not use it for inference.
    pub fn update_naive(self, toss: Toss) -> Self {
        let marginal_fair = 0.5_f64;
        // ∫₀¹ r dr = ∫₀¹ (1−r) dr = ½
        let marginal_bent = match toss {
            Toss::Zero | Toss::One => 0.5_f64,
        };
        Self {
            log_odds_fair: self.log_odds_fair + (marginal_fair.ln() - marginal_bent.ln()),
        }
    }

    pub fn log_odds_fair(&self) -> f64 {
        self.log_odds_fair
    }

    /// `p(H₀ | t)`.
    pub fn prob_fair(&self) -> f64 {
        sigmoid(self.log_odds_fair)
    }

    /// `p(H₁ | t)`.
    pub fn prob_bent(&self) -> f64 {
        sigmoid(-self.log_odds_fair)
    }
}

/// Quasi-iterative posterior after each toss (entry `i` has seen `i + 1` tosses).
pub fn coin_trajectory(tosses: &[Toss], prior: CoinPosterior) -> Vec<CoinPosterior> {
    let mut state = CoinState::default();
    let mut post = prior;
    tosses
        .iter()
        .map(|&toss| {
            (post, state) = post.update_quasi_iterative(state, toss);
            post
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exact `ln C(n, k)` as a sum of logs, independent of the gamma function.
    fn ln_binomial_by_sum(n: u64, k: u64) -> f64 {
        let k = k.min(n - k);
        (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
    }

    fn beta_oracle(k: u64, n: u64) -> f64 {
        -((n + 1) as f64).ln() - ln_binomial_by_sum(n, k)
    }

    /// Composite Simpson rule for ∫₀¹ r^k (1−r)^{n−k} dr.
    fn beta_quadrature(k: i32, n: i32) -> f64 {
        let steps = 2000;
        let h = 1.0 / steps as f64;
        let f = |r: f64| r.powi(k) * (1.0 - r).powi(n - k);
        let mut s = f(0.0) + f(1.0);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn beta_evidence_examples() {
        assert!(beta_log_evidence(0, 0).unwrap().value().abs() < 1e-14);
        let q = beta_quadrature(1, 2);
        assert!((q - 1.0 / 6.0).abs() < 1e-12);
        assert!((beta_log_evidence(1, 2).unwrap().value() - q.ln()).abs() < 1e-12);
        assert!(beta_log_evidence(3, 2).is_err());

        let v = beta_log_evidence(500, 1000).unwrap().value();
        assert!(v.is_finite());
        assert!((v - beta_oracle(500, 1000)).abs() < 1e-9);
    }

    #[test]
    fn beta_evidence_matches_quadrature() {
        for (k, n) in [(0, 5), (2, 7), (5, 9), (10, 20), (13, 13)] {
            let ev = beta_log_evidence(k as u64, n as u64).unwrap().value();
            assert!((ev - beta_quadrature(k, n).ln()).abs() < 1e-9, "k={k} n={n}");
        }
    }

    #[test]
    fn batch_examples() {
        let post = CoinPosterior::batch(CoinState::new(0, 0).unwrap(), 0.3);
        assert_eq!(post.log_odds_fair(), 0.3);

        // 2^-1000 · 1001 · C(1000, 500), evaluated by summed logs.
        let expected = -1000.0 * std::f64::consts::LN_2 + 1001f64.ln() + ln_binomial_by_sum(1000, 500);
        let post = CoinPosterior::batch(CoinState::new(1000, 500).unwrap(), 0.0);
        assert!((post.log_odds_fair() - expected).abs() < 1e-9);
        assert!((post.log_odds_fair() - 3.2291).abs() < 1e-3);

        let post = CoinPosterior::batch(CoinState::new(100, 100).unwrap(), 0.0);
        let expected = 101f64.ln() - 100.0 * std::f64::consts::LN_2;
        assert!((post.log_odds_fair() - expected).abs() < 1e-10);
        assert!(post.log_odds_fair() < -64.0);
    }

    #[test]
    fn first_toss_carries_no_information() {
        let prior = CoinPosterior::from_log_odds(0.0);
        for toss in [Toss::Zero, Toss::One] {
            let (post, state) = prior.update_quasi_iterative(CoinState::default(), toss);
            assert_eq!(post.log_odds_fair(), 0.0);
            assert_eq!(state.n_total(), 1);
        }
    }

    #[test]
    fn naive_update_is_inert_but_quasi_iterative_learns() {
        let ones = vec![Toss::One; 100];
        let prior = CoinPosterior::from_log_odds(0.0);
        let naive = ones.iter().fold(prior, |p, &t| p.update_naive(t));
        assert_eq!(naive, prior);
        let quasi = coin_trajectory(&ones, prior).last().copied().unwrap();
        assert!(quasi.prob_bent() > 0.999_999);
    }

    #[test]
    fn parse_tosses_reports_position() {
        assert_eq!(parse_tosses("0 1\n10").unwrap(), vec![Toss::Zero, Toss::One, Toss::One, Toss::Zero]);
        let err = parse_tosses("01x1").unwrap_err();
        assert!(err.to_string().contains("position 3"), "{err}");
        assert!(parse_tosses("").unwrap().is_empty());
    }

    #[test]
    fn prior_probability_validation() {
        assert!(CoinPosterior::from_prior_probability(0.0).is_err());
        assert!(CoinPosterior::from_prior_probability(1.0).is_err());
        let p = CoinPosterior::from_prior_probability(0.99).unwrap();
        assert!((p.prob_fair() - 0.99).abs() < 1e-14);
    }

    #[test]
    fn exact_evidence_normalizes_over_all_sequences() {
        // Σ_K C(N, K) · ∫ r^K (1−r)^{N−K} dr = 1, with exact integer binomials.
        for n in 0u64..=100 {
            let mut binom: u128 = 1;
            let mut total = 0.0;
            for k in 0..=n {
                total += (binom as f64) * beta_log_evidence(k, n).unwrap().value().exp();
                binom = binom * (n - k) as u128 / (k + 1) as u128;
            }
            assert!((total - 1.0).abs() < 1e-10, "N = {n}: {total}");
        }
    }

    #[test]
    fn balanced_evidence_ratio_grows_like_root_n() {
        // 2^-N (N+1) C(N, N/2) ~ (N+1) √(2/(πN)) ~ √(2(N+1)/π)
        for n in [100u64, 1000, 10_000] {
            let log_ratio = -(n as f64) * std::f64::consts::LN_2 - beta_log_evidence(n / 2, n).unwrap().value();
            let rate = (2.0 * (n + 1) as f64 / std::f64::consts::PI).sqrt();
            let rel = (log_ratio.exp() - rate).abs() / rate;
            assert!(rel < 0.02, "N = {n}: {} vs {rate}", log_ratio.exp());
        }
    }

    fn tosses() -> impl Strategy<Value = Vec<Toss>> {
        prop::collection::vec(prop_oneof![Just(Toss::Zero), Just(Toss::One)], 0..2000)
    }

    proptest! {
        #[test]
        fn quasi_iterative_fold_equals_batch(seq in tosses(), prior in -3f64..3.0) {
            let folded = coin_trajectory(&seq, CoinPosterior::from_log_odds(prior))
                .last()
                .copied()
                .unwrap_or(CoinPosterior::from_log_odds(prior));
            let batch = CoinPosterior::batch(CoinState::from_tosses(&seq), prior);
            prop_assert!((folded.log_odds_fair() - batch.log_odds_fair()).abs() < 1e-9);
        }

        #[test]
        fn naive_update_is_identity(seq in tosses(), prior in -10f64..10.0) {
            let start = CoinPosterior::from_log_odds(prior);
            let end = seq.iter().fold(start, |p, &t| p.update_naive(t));
            prop_assert_eq!(end, start);
        }

        #[test]
        fn batch_depends_only_on_counts(mut seq in tosses(), seed in any::<u64>()) {
            let before = CoinPosterior::batch(CoinState::from_tosses(&seq), 0.0);
            // deterministic shuffle
            let len = seq.len();
            let mut s = seed;
            for i in (1..len).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                seq.swap(i, (s >> 33) as usize % (i + 1));
            }
            let after = CoinPosterior::batch(CoinState::from_tosses(&seq), 0.0);
            prop_assert_eq!(before, after);
        }
    }
}
