//! `occam`: Bayesian model selection from the command line.
//!
//! ```text
//! occam regress --models poly:0..3 --preset fig4 --out traj.csv
//! occam coin --n 1000 --k 500
//! occam contingency --dataset mackay-28.4 --method exact
//! occam generate --preset fig5 --seed 7 --out data.csv
//! ```

use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use occam::bernoulli::{
    coin_trajectory, contingency_exact_log_evidence, contingency_laplace_log_evidence, contingency_map,
    contingency_model_posterior, laplace_boundary_notes, parse_tosses, CoinPosterior, CoinState, ContingencyCounts,
    ContingencyHypothesis, EvidenceMethod, Toss, BoundaryNote,
};
use occam::{
    generate, generate_coin, parse_hypothesis_set, run_selection, Dataset, GeneratorSpec, NoiseModel, Preset,
    XOrdering, XSampling,
};

mod config;
mod output;

use config::ConfigFile;
use output::write_atomic;

const DEFAULT_SIGMA: f64 = 0.1;
const DEFAULT_SIGMA_W: f64 = 10.0;
const DEFAULT_SEED: u64 = 0;

#[derive(Parser)]
#[command(name = "occam", version, about = "Bayesian evidence and model selection")]
struct Cli {
    /// TOML file with one table per subcommand; flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Streaming model selection over polynomial / trigonometric regressions
    Regress(RegressArgs),
    /// Fair vs bent coin
    Coin(CoinArgs),
    /// Four hypotheses for a 2x2 table of death-penalty counts
    Contingency(ContingencyArgs),
    /// Write a synthetic dataset (or toss sequence) from a preset or generator settings
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Laplace,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    Equispaced,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    Sorted,
    Random,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RegressArgs {
    /// Hypothesis set, e.g. `poly:0..3,trig:1..3`
    #[arg(long)]
    pub models: Option<String>,
    /// Generate the data from a named preset (fig4, fig5, fig6)
    #[arg(long, conflicts_with = "data")]
    pub preset: Option<String>,
    /// Read `x,t` rows from a CSV file
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Noise standard deviation [default: 0.1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Prior standard deviation of each weight [default: 10]
    #[arg(long)]
    pub sigma_w: Option<f64>,
    /// Seed for preset data [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trajectory output file
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trajectory format [default: csv]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct CoinArgs {
    /// File of 0/1 tosses, or `-` for standard input
    #[arg(long)]
    pub bits: Option<String>,
    /// Number of tosses (with --k)
    #[arg(long)]
    pub n: Option<u64>,
    /// Number of zeros among the tosses (with --n)
    #[arg(long)]
    pub k: Option<u64>,
    /// Simulate tosses from a named preset (fig3-coin)
    #[arg(long)]
    pub preset: Option<String>,
    /// Seed for preset tosses [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Prior probability of the fair coin [default: 0.5]
    #[arg(long)]
    pub prior_fair: Option<f64>,
    /// Write the per-toss posterior to this CSV file
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ContingencyArgs {
    /// Built-in table (mackay-28.4)
    #[arg(long, conflicts_with = "table")]
    pub dataset: Option<String>,
    /// CSV with rows `cell,deaths,non_deaths` for VM, VbarM, VMbar, VbarMbar
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Evidence used for the posterior [default: laplace]
    #[arg(long, value_enum)]
    pub method: Option<Method>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct GenerateArgs {
    /// Named preset (fig4, fig5, fig6, fig3-coin)
    #[arg(long)]
    pub preset: Option<String>,
    /// Generating basis, e.g. `poly:2` or `trig:3`
    #[arg(long, conflicts_with = "preset")]
    pub family: Option<String>,
    /// Comma-separated weights, one per basis function
    #[arg(long)]
    pub weights: Option<String>,
    /// Noise standard deviation [default: 0.1]
    #[arg(long)]
    pub noise: Option<f64>,
    /// Lower end of the x range [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    /// Upper end of the x range [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// Number of points [default: 50]
    #[arg(long)]
    pub points: Option<usize>,
    /// x placement [default: equispaced]
    #[arg(long, value_enum)]
    pub sampling: Option<Sampling>,
    /// Presentation order [default: sorted]
    #[arg(long, value_enum)]
    pub ordering: Option<Ordering>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output if omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A missing or conflicting option, reported like a clap usage error.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Runs one subcommand and returns the text for standard output. Files are
/// written before the report is returned, so an error leaves nothing behind.
fn run(cli: Cli) -> Result<String> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Regress(args) => cmd_regress(args.overlay(file.regress)),
        Command::Coin(args) => cmd_coin(args.overlay(file.coin)),
        Command::Contingency(args) => cmd_contingency(args.overlay(file.contingency)),
        Command::Generate(args) => cmd_generate(args.overlay(file.generate)),
    }
}

fn regression_preset(name: &str) -> Result<Preset> {
    let preset = Preset::from_name(name)?;
    if preset.is_coin() {
        bail!("preset `{name}` generates coin tosses, not regression data");
    }
    Ok(preset)
}

fn setting<T: std::fmt::Display>(value: Option<T>, default: T) -> (T, &'static str) {
    match value {
        Some(v) => (v, ""),
        None => (default, " (default)"),
    }
}

fn cmd_regress(args: RegressArgs) -> Result<String> {
    let models = args.models.ok_or_else(|| usage("the following required argument was not provided: --models <MODELS>"))?;
    let (sigma, sigma_note) = setting(args.sigma, DEFAULT_SIGMA);
    let (sigma_w, sigma_w_note) = setting(args.sigma_w, DEFAULT_SIGMA_W);
    let (seed, seed_note) = setting(args.seed, DEFAULT_SEED);
    let format = args.format.unwrap_or(Format::Csv);
    let families = parse_hypothesis_set(&models)?;
    let noise = NoiseModel::new(sigma, sigma_w)?;

    let (dataset, source) = match (&args.preset, &args.data) {
        (Some(name), None) => {
            let preset = regression_preset(name)?;
            let spec = preset.regression_spec(seed).expect("regression preset");
            let source = format!("preset {}, seed {seed}{seed_note}: {}", preset.name(), preset.description());
            (generate(&spec)?, source)
        }
        (None, Some(path)) => (
            Dataset::load_csv(path).with_context(|| format!("loading {}", path.display()))?,
            format!("{}", path.display()),
        ),
        (Some(_), Some(_)) => return Err(usage("--preset and --data are mutually exclusive")),
        (None, None) => return Err(usage("one of --preset or --data is required")),
    };

    let traj = run_selection(&models, &dataset, noise)?;
    if let Some(out) = &args.out {
        let text = match format {
            Format::Csv => traj.to_csv(),
            Format::Json => traj.to_json(),
        };
        write_atomic(out, &text)?;
    }

    let mut report = String::new();
    writeln!(report, "# occam regress")?;
    writeln!(report, "# models = {models} ({} hypotheses, equal priors)", families.len())?;
    writeln!(report, "# data = {source}")?;
    writeln!(report, "# points = {}", dataset.len())?;
    writeln!(report, "# sigma = {sigma}{sigma_note}, sigma_w = {sigma_w}{sigma_w_note}")?;
    if let Some(out) = &args.out {
        let name = if format == Format::Csv { "csv" } else { "json" };
        writeln!(report, "# trajectory = {} ({name})", out.display())?;
    }
    let last = traj.final_step().expect("non-empty dataset");
    writeln!(report, "{:<10} {:>6} {:>16} {:>14}", "model", "params", "ln evidence", "posterior")?;
    for (i, label) in traj.labels.iter().enumerate() {
        writeln!(
            report,
            "{:<10} {:>6} {:>16.4} {:>14.6e}",
            label,
            traj.dimensions[i],
            last.log_evidences[i].value(),
            last.posterior[i]
        )?;
    }
    let winner = traj.winner().expect("non-empty registry");
    writeln!(report, "winner: {} (after {} points)", traj.labels[winner], last.n)?;
    Ok(report)
}

fn read_bits(source: &str) -> Result<Vec<Toss>> {
    let text = if source == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf).context("reading tosses from standard input")?;
        buf
    } else {
        std::fs::read_to_string(source).with_context(|| format!("reading {source}"))?
    };
    parse_tosses(&text).with_context(|| format!("parsing tosses from {source}"))
}

fn cmd_coin(args: CoinArgs) -> Result<String> {
    let (prior_fair, prior_note) = setting(args.prior_fair, 0.5);
    let prior = CoinPosterior::from_prior_probability(prior_fair)?;
    let (seed, seed_note) = setting(args.seed, DEFAULT_SEED);

    let (tosses, state, source) = match (&args.bits, args.n, args.k, &args.preset) {
        (Some(path), None, None, None) => {
            let tosses = read_bits(path)?;
            let state = CoinState::from_tosses(&tosses);
            (Some(tosses), state, format!("tosses from {path}"))
        }
        (None, Some(n), Some(k), None) => (None, CoinState::new(n, k)?, "counts".to_string()),
        (None, None, None, Some(name)) => {
            let preset = Preset::from_name(name)?;
            let (p, n) = preset
                .coin_spec()
                .with_context(|| format!("preset `{name}` is not a coin preset"))?;
            let tosses = generate_coin(p, n, seed)?;
            let state = CoinState::from_tosses(&tosses);
            let source = format!("preset {}, seed {seed}{seed_note}: {}", preset.name(), preset.description());
            (Some(tosses), state, source)
        }
        (None, Some(_), None, None) | (None, None, Some(_), None) => {
            return Err(usage("--n and --k must be given together"))
        }
        _ => return Err(usage("exactly one of --bits, --n/--k or --preset is required")),
    };

    if let Some(path) = &args.trajectory {
        let tosses = tosses
            .as_ref()
            .ok_or_else(|| usage("--trajectory needs a toss sequence (--bits or --preset)"))?;
        let mut csv = String::from("n,toss,log_odds_fair,p_fair,p_bent\n");
        for (i, (post, toss)) in coin_trajectory(tosses, prior).iter().zip(tosses).enumerate() {
            writeln!(
                csv,
                "{},{},{:e},{:e},{:e}",
                i + 1,
                toss,
                post.log_odds_fair(),
                post.prob_fair(),
                post.prob_bent()
            )?;
        }
        write_atomic(path, &csv)?;
    }

    let post = CoinPosterior::batch(state, prior.log_odds_fair());
    let mut report = String::new();
    writeln!(report, "# occam coin")?;
    writeln!(report, "# data = {source}")?;
    writeln!(report, "# prior p(H0) = {prior_fair}{prior_note}")?;
    if let Some(path) = &args.trajectory {
        writeln!(report, "# trajectory = {}", path.display())?;
    }
    writeln!(report, "N = {}", state.n_total())?;
    writeln!(report, "K (zeros) = {}", state.n_zeros())?;
    writeln!(report, "ln p(H0|t)/p(H1|t) = {:.6}", post.log_odds_fair())?;
    writeln!(report, "p(H0|t) fair = {:.6}", post.prob_fair())?;
    writeln!(report, "p(H1|t) bent = {:.6}", post.prob_bent())?;
    Ok(report)
}

fn fmt_log(value: Result<f64, occam::Error>) -> String {
    match value {
        Ok(v) => format!("{v:.6}"),
        Err(_) => "invalid".to_string(),
    }
}

fn cmd_contingency(args: ContingencyArgs) -> Result<String> {
    let (counts, source) = match (&args.dataset, &args.table) {
        (Some(name), None) => (ContingencyCounts::builtin(name)?, format!("built-in {name}")),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let counts =
                ContingencyCounts::parse_csv(&text).with_context(|| format!("parsing {}", path.display()))?;
            (counts, format!("{}", path.display()))
        }
        (Some(_), Some(_)) => return Err(usage("--dataset and --table are mutually exclusive")),
        (None, None) => return Err(usage("one of --dataset or --table is required")),
    };
    let method = match args.method.unwrap_or(Method::Laplace) {
        Method::Laplace => EvidenceMethod::Laplace,
        Method::Exact => EvidenceMethod::Exact,
    };
    let posterior = contingency_model_posterior(&counts, [0.0; 4], method)?;

    let mut report = String::new();
    writeln!(report, "# occam contingency")?;
    writeln!(report, "# data = {source}")?;
    writeln!(
        report,
        "# posterior from {} evidence, equal priors",
        if method == EvidenceMethod::Laplace { "laplace" } else { "exact" }
    )?;
    writeln!(
        report,
        "{:<5} {:<58} {:>14} {:>14} {:>10}",
        "hyp", "MAP", "ln p laplace", "ln p exact", "posterior"
    )?;
    let mut notes = Vec::new();
    for (i, hyp) in ContingencyHypothesis::ALL.into_iter().enumerate() {
        let map = match contingency_map(&counts, hyp) {
            Ok(values) => hyp
                .parameter_names()
                .iter()
                .zip(&values)
                .map(|(name, v)| format!("{name}={v:.4}"))
                .collect::<Vec<_>>()
                .join(" "),
            Err(_) => "undefined".to_string(),
        };
        let laplace = fmt_log(contingency_laplace_log_evidence(&counts, hyp).map(|e| e.value()));
        let exact = fmt_log(contingency_exact_log_evidence(&counts, hyp).map(|e| e.value()));
        writeln!(report, "{:<5} {:<58} {:>14} {:>14} {:>10.6}", hyp.name(), map, laplace, exact, posterior[i])?;
        for note in laplace_boundary_notes(&counts, hyp) {
            let (group, what) = match note {
                BoundaryNote::MapOnBoundary { group } => (group, "MAP on the boundary, Laplace curvature uses the surviving count only"),
                BoundaryNote::EmptyGroup { group } => (group, "no observations, contributes evidence 1 and no Laplace term"),
            };
            notes.push(format!("{hyp} {}: {what}", hyp.parameter_names()[group]));
        }
    }
    let winner = occam::selection::leader(
        &posterior,
        &ContingencyHypothesis::ALL.map(|h| h.parameter_names().len()),
        &ContingencyHypothesis::ALL.map(|h| h.name().to_string()),
    );
    writeln!(report, "winner: {}", ContingencyHypothesis::ALL[winner])?;
    for note in notes {
        writeln!(report, "note: {note}")?;
    }
    Ok(report)
}

fn parse_family(text: &str) -> Result<occam::BasisFamily> {
    let term = text.trim();
    let expanded = match term.split_once(':') {
        Some((kind, k)) if !k.contains("..") => format!("{kind}:{k}..{k}"),
        _ => term.to_string(),
    };
    let families = parse_hypothesis_set(&expanded)?;
    match families.as_slice() {
        [family] => Ok(*family),
        _ => Err(usage(format!("--family takes a single basis, got `{text}`"))),
    }
}

fn parse_weights(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|w| {
            w.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("invalid weight `{}` in --weights", w.trim())))
        })
        .collect()
}

fn cmd_generate(args: GenerateArgs) -> Result<String> {
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let text = match (&args.preset, &args.family) {
        (Some(name), None) => {
            let preset = Preset::from_name(name)?;
            if let Some((p, n)) = preset.coin_spec() {
                let mut bits: String = generate_coin(p, n, seed)?.iter().map(|t| t.as_char()).collect();
                bits.push('\n');
                bits
            } else {
                generate(&preset.regression_spec(seed).expect("regression preset"))?.to_csv()
            }
        }
        (None, Some(family)) => {
            let family = parse_family(family)?;
            let weights = parse_weights(
                args.weights
                    .as_deref()
                    .ok_or_else(|| usage("--weights is required with --family"))?,
            )?;
            let spec = GeneratorSpec {
                family,
                weights,
                noise_sigma: args.noise.unwrap_or(DEFAULT_SIGMA),
                x_range: (args.x_min.unwrap_or(0.0), args.x_max.unwrap_or(1.0)),
                n_points: args.points.unwrap_or(50),
                seed,
                sampling: match args.sampling.unwrap_or(Sampling::Equispaced) {
                    Sampling::Equispaced => XSampling::Equispaced,
                    Sampling::Uniform => XSampling::Uniform,
                },
                ordering: match args.ordering.unwrap_or(Ordering::Sorted) {
                    Ordering::Sorted => XOrdering::SortedByX,
                    Ordering::Random => XOrdering::RandomOrder,
                },
            };
            generate(&spec)?.to_csv()
        }
        (Some(_), Some(_)) => return Err(usage("--preset and --family are mutually exclusive")),
        (None, None) => return Err(usage("one of --preset or --family is required")),
    };
    match &args.out {
        Some(path) => {
            write_atomic(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}
