//! Four-hypothesis comparison over a 2×2 table of Bernoulli counts.
//!
//! Each cell is a (victim race, defendant race) combination holding death
//! and non-death counts. A hypothesis partitions the cells into groups that
//! share one death probability, each with a uniform prior:
//!
//! | hypothesis | groups                                      |
//! |------------|---------------------------------------------|
//! | `H00`      | all four cells                              |
//! | `H10`      | split by victim race                        |
//! | `H01`      | split by defendant race                     |
//! | `H11`      | every cell on its own                       |
//!
//! With uniform priors the evidence factorizes into one beta integral per
//! group, which [`contingency_exact_log_evidence`] evaluates. The Laplace
//! variant reproduces the textbook treatment, including its handling of a
//! group whose MAP sits on the boundary.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bernoulli::coin::beta_log_evidence;
use crate::error::{Error, Result};
use crate::laplace::{laplace_log_evidence, LaplaceInput, LogEvidence};
use crate::math::normalize_log_weights;

/// Table cell. `V` = white victim, `M` = white defendant; `bar` negates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    VM,
    VbarM,
    VMbar,
    VbarMbar,
}

impl Cell {
    pub const ALL: [Cell; 4] = [Cell::VM, Cell::VbarM, Cell::VMbar, Cell::VbarMbar];

    pub fn name(self) -> &'static str {
        match self {
            Cell::VM => "VM",
            Cell::VbarM => "VbarM",
            Cell::VMbar => "VMbar",
            Cell::VbarMbar => "VbarMbar",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn white_victim(self) -> bool {
        matches!(self, Cell::VM | Cell::VMbar)
    }

    fn white_defendant(self) -> bool {
        matches!(self, Cell::VM | Cell::VbarM)
    }
}

impl FromStr for Cell {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Cell::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::Input(format!("unknown cell `{}` (expected VM, VbarM, VMbar or VbarMbar)", s.trim())))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CellCounts {
    pub deaths: u64,
    pub non_deaths: u64,
}

impl CellCounts {
    pub fn new(deaths: u64, non_deaths: u64) -> Self {
        Self { deaths, non_deaths }
    }

    pub fn total(&self) -> u64 {
        self.deaths + self.non_deaths
    }
}

impl std::ops::Add for CellCounts {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self::new(self.deaths + rhs.deaths, self.non_deaths + rhs.non_deaths)
    }
}

/// Counts for all four cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContingencyCounts {
    cells: [CellCounts; 4],
}

/// Name of the built-in death-penalty table.
pub const MACKAY_28_4: &str = "mackay-28.4";

impl ContingencyCounts {
    pub fn new(vm: CellCounts, vbar_m: CellCounts, v_mbar: CellCounts, vbar_mbar: CellCounts) -> Self {
        Self {
            cells: [vm, vbar_m, v_mbar, vbar_mbar],
        }
    }

    /// The death-penalty sentencing table (exercise 28.4 of MacKay's
    /// *Information Theory, Inference, and Learning Algorithms*).
    pub fn mackay_28_4() -> Self {
        Self::new(
            CellCounts::new(19, 132),
            CellCounts::new(0, 9),
            CellCounts::new(11, 52),
            CellCounts::new(6, 97),
        )
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            MACKAY_28_4 => Ok(Self::mackay_28_4()),
            other => Err(Error::Input(format!("unknown built-in dataset `{other}` (available: {MACKAY_28_4})"))),
        }
    }

    pub fn get(&self, cell: Cell) -> CellCounts {
        self.cells[cell.index()]
    }

    /// Parses `cell,deaths,non_deaths` rows. A leading header row whose first
    /// field is `cell` is skipped. Every cell must appear exactly once.
    pub fn parse_csv(input: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .comment(Some(b'#'))
            .from_reader(input.as_bytes());
        let mut seen: [Option<CellCounts>; 4] = [None; 4];
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse {
                line: i + 1,
                reason: e.to_string(),
            })?;
            let line = record.position().map_or(i + 1, |p| p.line() as usize);
            let parse_err = |reason: String| Error::Parse { line, reason };
            if record.len() == 1 && record[0].is_empty() {
                continue;
            }
            if i == 0 && record.get(0).is_some_and(|f| f.eq_ignore_ascii_case("cell")) {
                continue;
            }
            if record.len() != 3 {
                return Err(parse_err(format!("expected 3 fields `cell,deaths,non_deaths`, got {}", record.len())));
            }
            let cell: Cell = record[0].parse().map_err(|e: Error| parse_err(e.to_string()))?;
            let count = |field: &str, what: &str| {
                field
                    .parse::<u64>()
                    .map_err(|_| parse_err(format!("{what} must be a non-negative integer, got `{field}`")))
            };
            let counts = CellCounts::new(count(&record[1], "deaths")?, count(&record[2], "non_deaths")?);
            if seen[cell.index()].replace(counts).is_some() {
                return Err(parse_err(format!("cell {cell} listed twice")));
            }
        }
        let mut cells = [CellCounts::default(); 4];
        for cell in Cell::ALL {
            cells[cell.index()] =
                seen[cell.index()].ok_or_else(|| Error::Input(format!("contingency table is missing cell {cell}")))?;
        }
        Ok(Self { cells })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContingencyHypothesis {
    /// Neither race matters.
    H00,
    /// Only the victim's race matters.
    H10,
    /// Only the defendant's race matters.
    H01,
    /// Both matter.
    H11,
}

impl ContingencyHypothesis {
    pub const ALL: [ContingencyHypothesis; 4] = [Self::H00, Self::H10, Self::H01, Self::H11];

    pub fn name(self) -> &'static str {
        match self {
            Self::H00 => "H00",
            Self::H10 => "H10",
            Self::H01 => "H01",
            Self::H11 => "H11",
        }
    }

    /// The cell partition. Group order fixes parameter order: `H10` and `H01`
    /// list the white group first (`tau`, then `chi`); `H11` follows
    /// [`Cell::ALL`] (`tau`, `chi`, `rho`, `theta_vm_bar_m_bar`).
    pub fn groups(self) -> Vec<Vec<Cell>> {
        let split = |pred: fn(Cell) -> bool| {
            let (a, b): (Vec<Cell>, Vec<Cell>) = Cell::ALL.into_iter().partition(|&c| pred(c));
            vec![a, b]
        };
        match self {
            Self::H00 => vec![Cell::ALL.to_vec()],
            Self::H10 => split(Cell::white_victim),
            Self::H01 => split(Cell::white_defendant),
            Self::H11 => Cell::ALL.iter().map(|&c| vec![c]).collect(),
        }
    }

    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            Self::H00 => &["tau"],
            Self::H10 | Self::H01 => &["tau", "chi"],
            Self::H11 => &["tau", "chi", "rho", "theta_vm_bar_m_bar"],
        }
    }
}

impl fmt::Display for ContingencyHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Pooled counts per parameter group.
pub fn group_counts(counts: &ContingencyCounts, hyp: ContingencyHypothesis) -> Vec<CellCounts> {
    hyp.groups()
        .iter()
        .map(|g| g.iter().fold(CellCounts::default(), |acc, &c| acc + counts.get(c)))
        .collect()
}

/// MAP (= ML under uniform priors) death probability per group.
pub fn contingency_map(counts: &ContingencyCounts, hyp: ContingencyHypothesis) -> Result<Vec<f64>> {
    group_counts(counts, hyp)
        .into_iter()
        .enumerate()
        .map(|(group, c)| {
            if c.total() == 0 {
                Err(Error::EmptyGroup { group })
            } else {
                Ok(c.deaths as f64 / c.total() as f64)
            }
        })
        .collect()
}

/// Why a group's Laplace term deviates from the interior-mode recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryNote {
    /// MAP at 0 or 1: the vanishing-count curvature term is dropped.
    MapOnBoundary { group: usize },
    /// No observations: the group integrates to exactly 1 and is left out of the Hessian.
    EmptyGroup { group: usize },
}

impl fmt::Display for BoundaryNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryNote::MapOnBoundary { group } => {
                write!(f, "group {group}: MAP on the boundary, Laplace curvature uses the surviving count only")
            }
            BoundaryNote::EmptyGroup { group } => {
                write!(f, "group {group}: no observations, contributes evidence 1 and no Laplace term")
            }
        }
    }
}

pub fn laplace_boundary_notes(counts: &ContingencyCounts, hyp: ContingencyHypothesis) -> Vec<BoundaryNote> {
    group_counts(counts, hyp)
        .into_iter()
        .enumerate()
        .filter_map(|(group, c)| match (c.deaths, c.non_deaths) {
            (0, 0) => Some(BoundaryNote::EmptyGroup { group }),
            (0, _) | (_, 0) => Some(BoundaryNote::MapOnBoundary { group }),
            _ => None,
        })
        .collect()
}

/// Laplace evidence with a diagonal Hessian, one entry `a/θ² + b/(1−θ)²` per
/// group. A zero count contributes neither to the log-likelihood nor to the
/// curvature; empty groups are left out entirely.
pub fn contingency_laplace_log_evidence(counts: &ContingencyCounts, hyp: ContingencyHypothesis) -> Result<LogEvidence> {
    let mut log_joint = 0.0;
    let mut curvature = Vec::new();
    for c in group_counts(counts, hyp) {
        if c.total() == 0 {
            continue;
        }
        let (a, b) = (c.deaths as f64, c.non_deaths as f64);
        let theta = a / (a + b);
        let mut h = 0.0;
        if c.deaths > 0 {
            log_joint += a * theta.ln();
            h += a / (theta * theta);
        }
        if c.non_deaths > 0 {
            log_joint += b * (1.0 - theta).ln();
            h += b / ((1.0 - theta) * (1.0 - theta));
        }
        curvature.push(h);
    }
    if curvature.is_empty() {
        return Ok(LogEvidence(0.0));
    }
    laplace_log_evidence(&LaplaceInput {
        log_joint_at_map: log_joint,
        hessian: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(curvature)),
    })
}

/// Exact evidence: a product of beta integrals, one per group.
pub fn contingency_exact_log_evidence(counts: &ContingencyCounts, hyp: ContingencyHypothesis) -> Result<LogEvidence> {
    group_counts(counts, hyp)
        .into_iter()
        .try_fold(0.0, |acc, c| Ok(acc + beta_log_evidence(c.deaths, c.total())?.value()))
        .map(LogEvidence)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvidenceMethod {
    Laplace,
    Exact,
}

impl FromStr for EvidenceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "laplace" => Ok(Self::Laplace),
            "exact" => Ok(Self::Exact),
            other => Err(Error::Input(format!("unknown evidence method `{other}` (use laplace or exact)"))),
        }
    }
}

pub fn contingency_log_evidence(
    counts: &ContingencyCounts,
    hyp: ContingencyHypothesis,
    method: EvidenceMethod,
) -> Result<LogEvidence> {
    match method {
        EvidenceMethod::Laplace => contingency_laplace_log_evidence(counts, hyp),
        EvidenceMethod::Exact => contingency_exact_log_evidence(counts, hyp),
    }
}

/// Posterior over `[H00, H10, H01, H11]`. Log priors need not be normalized;
/// a `-inf` entry excludes that hypothesis.
pub fn contingency_model_posterior(
    counts: &ContingencyCounts,
    model_log_priors: [f64; 4],
    method: EvidenceMethod,
) -> Result<[f64; 4]> {
    if model_log_priors.iter().any(|p| p.is_nan() || *p == f64::INFINITY) {
        return Err(Error::Input("model log priors must be finite or -inf".into()));
    }
    if model_log_priors.iter().all(|p| *p == f64::NEG_INFINITY) {
        return Err(Error::Input("at least one hypothesis needs a positive prior".into()));
    }
    let mut weights = [0.0; 4];
    for (w, (hyp, prior)) in weights.iter_mut().zip(ContingencyHypothesis::ALL.into_iter().zip(model_log_priors)) {
        *w = if prior == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            prior + contingency_log_evidence(counts, hyp, method)?.value()
        };
    }
    let probs = normalize_log_weights(&weights);
    Ok([probs[0], probs[1], probs[2], probs[3]])
}
