//! Synthetic data for the regression and coin scenarios, plus CSV I/O.
//!
//! Randomness comes from `ChaCha8Rng` seeded with `seed_from_u64`, so a given
//! seed yields the same dataset on every platform.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::BasisFamily;
use crate::bernoulli::coin::Toss;
use crate::error::{Error, Result};

/// Ordered `(x, t)` pairs. The order is the streaming order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pairs: Vec<(f64, f64)>,
}

impl Dataset {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if let Some(row) = pairs.iter().position(|(x, t)| !x.is_finite() || !t.is_finite()) {
            return Err(Error::AtRow {
                row,
                source: Box::new(Error::Input("non-finite value".into())),
            });
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn xs(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// First `n` points.
    pub fn prefix(&self, n: usize) -> Self {
        Self {
            pairs: self.pairs[..n.min(self.pairs.len())].to_vec(),
        }
    }

    /// Reads `x,t` rows. A header line `x,t` is detected and skipped.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::read_csv(file)
    }

    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut pairs = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Parse {
                line: i + 1,
                reason: e.to_string(),
            })?;
            let line = record.position().map_or(i + 1, |p| p.line() as usize);
            if record.len() == 1 && record[0].is_empty() {
                continue;
            }
            if i == 0 && record.len() == 2 && record[0].eq_ignore_ascii_case("x") && record[1].eq_ignore_ascii_case("t") {
                continue;
            }
            if record.len() != 2 {
                return Err(Error::Parse {
                    line,
                    reason: format!("expected two columns `x,t`, got {}", record.len()),
                });
            }
            let num = |field: &str| -> Result<f64> {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    reason: format!("`{field}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        reason: format!("`{field}` is not finite"),
                    });
                }
                Ok(v)
            };
            pairs.push((num(&record[0])?, num(&record[1])?));
        }
        Ok(Self { pairs })
    }

    /// CSV with an `x,t` header. Values use shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,t\n");
        for (x, t) in &self.pairs {
            writeln!(out, "{x:?},{t:?}").unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XSampling {
    /// `n` evenly spaced points covering `[lo, hi]`.
    Equispaced,
    /// Independent uniform draws from `[lo, hi)`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XOrdering {
    SortedByX,
    RandomOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: BasisFamily,
    pub weights: Vec<f64>,
    pub noise_sigma: f64,
    pub x_range: (f64, f64),
    pub n_points: usize,
    pub seed: u64,
    pub sampling: XSampling,
    pub ordering: XOrdering,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.x_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Input(format!("x range must satisfy lo < hi, got ({lo}, {hi})")));
        }
        if self.weights.len() != self.family.dimension() {
            return Err(Error::Dimension {
                what: "generator weights",
                expected: self.family.dimension(),
                actual: self.weights.len(),
            });
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Input("generator weights must be finite".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Input(format!("noise sigma must be non-negative, got {}", self.noise_sigma)));
        }
        Ok(())
    }

    /// Noise-free target `wᵀφ(x)`.
    pub fn mean_at(&self, x: f64) -> Result<f64> {
        let phi = self.family.evaluate(x)?;
        Ok(phi.dot(&DVector::from_column_slice(&self.weights)))
    }
}

/// Draws `t = wᵀφ(x) + ε`, `ε ~ N(0, noise_sigma²)`.
pub fn generate(spec: &GeneratorSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = spec.x_range;
    let n = spec.n_points;
    let mut xs: Vec<f64> = match spec.sampling {
        XSampling::Equispaced if n == 1 => vec![lo],
        XSampling::Equispaced => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        XSampling::Uniform => (0..n).map(|_| rng.random_range(lo..hi)).collect(),
    };
    match spec.ordering {
        XOrdering::SortedByX => xs.sort_by(f64::total_cmp),
        XOrdering::RandomOrder => xs.shuffle(&mut rng),
    }
    let mut pairs = Vec::with_capacity(n);
    for x in xs {
        let eps: f64 = rng.sample(StandardNormal);
        pairs.push((x, spec.mean_at(x)? + spec.noise_sigma * eps));
    }
    Dataset::new(pairs)
}

/// Bernoulli tosses with `P(Zero) = p_heads`.
pub fn generate_coin(p_heads: f64, n: usize, seed: u64) -> Result<Vec<Toss>> {
    if !(0.0..=1.0).contains(&p_heads) {
        return Err(Error::Input(format!("p_heads must lie in [0, 1], got {p_heads}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            if rng.random::<f64>() < p_heads {
                Toss::Zero
            } else {
                Toss::One
            }
        })
        .collect())
}

/// Named scenario reconstructions. The coefficients and noise levels are
/// invented; the scenarios only mirror the qualitative setups (quadratic
/// growth with low noise, a third-order trigonometric signal with high or low
/// noise, a slightly bent coin).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    Fig4,
    Fig5,
    Fig6,
    Fig3Coin,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig4, Preset::Fig5, Preset::Fig6, Preset::Fig3Coin];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig3Coin => "fig3-coin",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
                Error::Input(format!("unknown preset `{name}` (available: {})", names.join(", ")))
            })
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Fig4 => "quadratic growth t = 0.5 + 2x² on [0, 1], 50 points, noise 0.1",
            Preset::Fig5 => "Trig3 signal on [-2, 2], 100 points, noise 0.5",
            Preset::Fig6 => "Trig3 signal on [0, 2], 60 points, noise 0.1",
            Preset::Fig3Coin => "bent coin, P(heads = 0) = 0.55, 1000 tosses",
        }
    }

    pub fn is_coin(self) -> bool {
        self == Preset::Fig3Coin
    }

    /// Regression generator for this preset; `None` for the coin preset.
    pub fn regression_spec(self, seed: u64) -> Option<GeneratorSpec> {
        let trig3 = BasisFamily::trigonometric(3).expect("order 3");
        let (family, weights, noise_sigma, x_range, n_points) = match self {
            Preset::Fig4 => (BasisFamily::poly_degree(2), vec![0.5, 0.0, 2.0], 0.1, (0.0, 1.0), 50),
            // basis order: 1, cos πx, sin πx, cos 2πx, sin 2πx, cos 3πx, sin 3πx
            Preset::Fig5 => (trig3, vec![0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.8], 0.5, (-2.0, 2.0), 100),
            Preset::Fig6 => (trig3, vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.4], 0.1, (0.0, 2.0), 60),
            Preset::Fig3Coin => return None,
        };
        Some(GeneratorSpec {
            family,
            weights,
            noise_sigma,
            x_range,
            n_points,
            seed,
            sampling: XSampling::Equispaced,
            ordering: XOrdering::SortedByX,
        })
    }

    /// `(p_heads, n)` for the coin preset.
    pub fn coin_spec(self) -> Option<(f64, usize)> {
        match self {
            Preset::Fig3Coin => Some((0.55, 1000)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian_posterior::{GaussianBelief, NoiseModel};

    fn quad_spec(noise_sigma: f64, n: usize, seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            family: BasisFamily::polynomial(3).unwrap(),
            weights: vec![0.0, 0.0, 1.0],
            noise_sigma,
            x_range: (-1.0, 1.0),
            n_points: n,
            seed,
            sampling: XSampling::Uniform,
            ordering: XOrdering::RandomOrder,
        }
    }

    #[test]
    fn noiseless_generation_is_exact() {
        let ds = generate(&quad_spec(0.0, 25, 1)).unwrap();
        for &(x, t) in ds.pairs() {
            assert_eq!(t, x * x);
        }
    }

    #[test]
    fn same_seed_same_data() {
        let a = generate(&quad_spec(0.3, 40, 99)).unwrap();
        assert_eq!(a, generate(&quad_spec(0.3, 40, 99)).unwrap());
        assert_ne!(a, generate(&quad_spec(0.3, 40, 100)).unwrap());
    }

    #[test]
    fn noise_has_requested_scale() {
        let spec = quad_spec(0.1, 10_000, 7);
        let ds = generate(&spec).unwrap();
        let resid: Vec<f64> = ds.pairs().iter().map(|&(x, t)| t - x * x).collect();
        let mean = resid.iter().sum::<f64>() / resid.len() as f64;
        let var = resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (resid.len() - 1) as f64;
        assert!((var.sqrt() / 0.1 - 1.0).abs() < 0.03, "std {}", var.sqrt());
    }

    #[test]
    fn equispaced_sorted_layout() {
        let mut spec = quad_spec(0.0, 5, 0);
        spec.sampling = XSampling::Equispaced;
        spec.ordering = XOrdering::SortedByX;
        assert_eq!(generate(&spec).unwrap().xs(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        spec.n_points = 0;
        assert!(generate(&spec).unwrap().is_empty());
        spec.n_points = 1;
        assert_eq!(generate(&spec).unwrap().xs(), vec![-1.0]);
    }

    #[test]
    fn invalid_specs() {
        let mut spec = quad_spec(0.1, 5, 0);
        spec.x_range = (1.0, 1.0);
        assert!(generate(&spec).is_err());
        let mut spec = quad_spec(0.1, 5, 0);
        spec.weights.pop();
        assert!(generate(&spec).is_err());
        let mut spec = quad_spec(0.1, 5, 0);
        spec.noise_sigma = -1.0;
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn map_recovers_generating_weights_at_low_noise() {
        let sigma = 1e-4;
        let mut spec = quad_spec(sigma, 30, 3);
        spec.weights = vec![0.5, -1.0, 2.0];
        let ds = generate(&spec).unwrap();
        let design = spec.family.design_matrix(&ds.xs()).unwrap();
        let nm = NoiseModel::new(sigma, 10.0).unwrap();
        let w = GaussianBelief::update_batch(&design, &ds.ts(), &nm).unwrap().map_estimate();
        for (got, want) in w.iter().zip(&spec.weights) {
            assert!((got - want).abs() < 10.0 * sigma, "{got} vs {want}");
        }
    }

    #[test]
    fn coin_examples() {
        assert!(generate_coin(1.0, 50, 4).unwrap().iter().all(|&t| t == Toss::Zero));
        assert!(generate_coin(0.0, 50, 4).unwrap().iter().all(|&t| t == Toss::One));
        assert_eq!(generate_coin(0.55, 300, 11).unwrap(), generate_coin(0.55, 300, 11).unwrap());
        let tosses = generate_coin(0.55, 100_000, 5).unwrap();
        let freq = tosses.iter().filter(|&&t| t == Toss::Zero).count() as f64 / 1e5;
        assert!((freq - 0.55).abs() < 0.01);
        assert!(generate_coin(1.5, 1, 0).is_err());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let ds = Dataset::read_csv("1,2\n3,4".as_bytes()).unwrap();
        assert_eq!(ds.pairs(), &[(1.0, 2.0), (3.0, 4.0)]);
        let ds = Dataset::read_csv("x,t\n0,1\n".as_bytes()).unwrap();
        assert_eq!(ds.pairs(), &[(0.0, 1.0)]);
        let err = Dataset::read_csv("1,abc".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = Dataset::read_csv("1,2\n3".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(Dataset::read_csv("".as_bytes()).unwrap().is_empty());

        let generated = generate(&quad_spec(0.2, 20, 8)).unwrap();
        assert_eq!(Dataset::read_csv(generated.to_csv().as_bytes()).unwrap(), generated);
    }

    #[test]
    fn load_csv_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "x,t\n0.5,1.5\n").unwrap();
        assert_eq!(Dataset::load_csv(&path).unwrap().pairs(), &[(0.5, 1.5)]);
        assert!(Dataset::load_csv(dir.path().join("missing.csv")).is_err());
    }

    #[test]
    fn presets() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()).unwrap(), p);
            assert_eq!(p.is_coin(), p.regression_spec(0).is_none());
            if let Some(spec) = p.regression_spec(1) {
                spec.validate().unwrap();
            }
        }
        assert!(Preset::from_name("fig9").is_err());
    }
}
