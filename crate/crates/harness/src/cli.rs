//! Command-line front end: argument schema and dispatch for the `dualdiv`
//! binary.  Experiment subcommands read a JSON configuration file with flag
//! overrides; data subcommands read plain-text samples, one number per line.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use dualdiv_core::estimators::{dphi_estimate, mdpde, mdphi_estimate, mle};
use dualdiv_core::robustness::{asymptotic_variance_and_are, InfluenceProfile};
use dualdiv_core::testing::{test_statistic_with_box, TestConfig};
use dualdiv_core::{
    Boundedness, CressieRead, DualCriterion, EstimateResult, IfTarget, Model, SearchBox,
};

use crate::adaptive::adaptive_alpha;
use crate::contamination::ContaminationSpec;
use crate::level::level_curve;
use crate::mc::{run_mc, EstimatorSpec, McConfig};
use crate::report::{rows_from_summaries, write_csv, write_json};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "dualdiv",
    version,
    about = "Dual divergence estimation, robustness analysis, and Monte Carlo experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a parameter from a sample file
    Estimate(EstimateArgs),
    /// Influence function, sensitivity and variance of a functional
    Influence(InfluenceArgs),
    /// Asymptotic variance and relative efficiency of the estimator
    Are(AreArgs),
    /// Run the divergence test of a point null on a sample file
    Test(TestArgs),
    /// Monte Carlo bias/MSE study from a JSON configuration
    Simulate(SimulateArgs),
    /// Empirical test level across a grid of nominal levels
    LevelCurve(LevelCurveArgs),
    /// Leave-one-out stability scan over candidate escorts
    AdaptiveAlpha(AdaptiveAlphaArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model family: normal-scale, normal-location, cauchy or logistic
    #[arg(long)]
    pub model: String,
    /// Fixed nuisance value (mean for normal-scale, sigma for
    /// normal-location; ignored by cauchy/logistic)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub known: f64,
}

impl ModelArgs {
    fn build(&self) -> Result<Model> {
        Ok(Model::from_name(&self.model, self.known)?)
    }
}

#[derive(Debug, Args)]
pub struct BoxArgs {
    /// Lower edge of the search box (requires --box-hi)
    #[arg(long, allow_negative_numbers = true)]
    pub box_lo: Option<f64>,
    /// Upper edge of the search box (requires --box-lo)
    #[arg(long, allow_negative_numbers = true)]
    pub box_hi: Option<f64>,
    /// Grid resolution of the box scan
    #[arg(long)]
    pub grid_points: Option<usize>,
}

impl BoxArgs {
    fn build(&self) -> Result<Option<SearchBox>> {
        let bx = match (self.box_lo, self.box_hi) {
            (None, None) => None,
            (Some(lo), Some(hi)) => Some(SearchBox::new(lo, hi)?),
            _ => {
                return Err(Error::Config(
                    "--box-lo and --box-hi must be given together".into(),
                ))
            }
        };
        match (bx, self.grid_points) {
            (Some(b), Some(g)) => Ok(Some(b.with_grid_points(g)?)),
            (None, Some(_)) => Err(Error::Config(
                "--grid-points needs --box-lo/--box-hi".into(),
            )),
            (b, None) => Ok(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    /// Dual divergence estimator at a fixed escort (needs --gamma, --alpha)
    Dphi,
    /// Joint escort minimisation (needs --gamma)
    Mdphi,
    /// Minimum density power divergence (needs --beta)
    Mdpde,
    /// Maximum likelihood
    Mle,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = EstimatorKind::Dphi)]
    pub estimator: EstimatorKind,
    /// Divergence index (dphi, mdphi)
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Escort parameter (dphi)
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Density power tuning (mdpde)
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Sample file, one number per line ('-' for stdin)
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub search: BoxArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetKind {
    Estimator,
    Divergence,
    Minimizer,
}

impl From<TargetKind> for IfTarget {
    fn from(t: TargetKind) -> IfTarget {
        match t {
            TargetKind::Estimator => IfTarget::Estimator,
            TargetKind::Divergence => IfTarget::Divergence,
            TargetKind::Minimizer => IfTarget::Minimizer,
        }
    }
}

#[derive(Debug, Args)]
pub struct InfluenceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Parameter at which the functional is linearised
    #[arg(long, allow_negative_numbers = true)]
    pub theta0: f64,
    #[arg(long, value_enum, default_value_t = TargetKind::Estimator)]
    pub target: TargetKind,
    /// Contamination points to evaluate, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    pub x: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct AreArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta0: f64,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Escort parameter (must differ from --theta0)
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Null hypothesis parameter
    #[arg(long, allow_negative_numbers = true)]
    pub theta0: f64,
    /// Nominal level of the test
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    /// Sample file, one number per line ('-' for stdin)
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub search: BoxArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON experiment configuration
    #[arg(long)]
    pub config: PathBuf,
    /// Base seed of the replication streams (required for reproducibility)
    #[arg(long, required = true)]
    pub seed: u64,
    /// CI profile: 1000 replications instead of the configured count
    #[arg(long)]
    pub fast: bool,
    /// Override the configured sample size
    #[arg(long)]
    pub n: Option<usize>,
    /// Override the configured replication count (wins over --fast)
    #[arg(long)]
    pub ns: Option<usize>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct LevelCurveArgs {
    /// JSON experiment configuration
    #[arg(long)]
    pub config: PathBuf,
    /// Base seed of the replication streams
    #[arg(long, required = true)]
    pub seed: u64,
    /// CI profile: 1000 replications instead of the configured count
    #[arg(long)]
    pub fast: bool,
    /// Nominal levels, comma separated (default 0.01..0.10)
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct AdaptiveAlphaArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Candidate escorts, comma separated
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub alpha_grid: Vec<f64>,
    /// Sample file, one number per line ('-' for stdin)
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub search: BoxArgs,
}

// ---------------------------------------------------------------------------
// configuration file schemas

fn default_ns() -> usize {
    5000
}

#[derive(Debug, Deserialize)]
struct ModelSpec {
    name: String,
    #[serde(default)]
    known: f64,
}

#[derive(Debug, Deserialize)]
struct BoxSpec {
    lo: f64,
    hi: f64,
    grid_points: Option<usize>,
    refine_tol: Option<f64>,
}

impl BoxSpec {
    fn build(&self) -> Result<SearchBox> {
        let mut bx = SearchBox::new(self.lo, self.hi)?;
        if let Some(g) = self.grid_points {
            bx = bx.with_grid_points(g)?;
        }
        if let Some(t) = self.refine_tol {
            bx = bx.with_refine_tol(t)?;
        }
        Ok(bx)
    }
}

/// Schema of `simulate --config`.
#[derive(Debug, Deserialize)]
struct SimulateConfig {
    model: ModelSpec,
    theta0: f64,
    n: usize,
    #[serde(default = "default_ns")]
    n_s: usize,
    estimators: Vec<EstimatorSpec>,
    #[serde(default)]
    contamination: Option<ContaminationSpec>,
    #[serde(default)]
    search_box: Option<BoxSpec>,
}

/// Schema of `level-curve --config`.
#[derive(Debug, Deserialize)]
struct LevelCurveConfig {
    model: ModelSpec,
    theta0: f64,
    gamma: f64,
    alpha: f64,
    n: usize,
    #[serde(default = "default_ns")]
    n_s: usize,
    #[serde(default)]
    contamination: Option<ContaminationSpec>,
    #[serde(default)]
    search_box: Option<BoxSpec>,
    #[serde(default)]
    levels: Option<Vec<f64>>,
}

fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("invalid configuration {}: {e}", path.display())))
}

/// Reads a sample file: one decimal number per line, blank lines ignored,
/// `-` for standard input.
pub fn read_sample(path: &Path) -> Result<Vec<f64>> {
    let text = if path == Path::new("-") {
        let mut buf = String::new();
        io::stdin().read_to_string(&mut buf)?;
        buf
    } else {
        fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?
    };
    let mut sample = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| {
            Error::Config(format!("line {} is not a number: {t:?}", i + 1))
        })?;
        sample.push(v);
    }
    if sample.is_empty() {
        return Err(Error::Config("the sample file holds no numbers".into()));
    }
    Ok(sample)
}

fn write_output(out: Option<&Path>, body: &[u8]) -> Result<()> {
    match out {
        None => {
            io::stdout().write_all(body)?;
            Ok(())
        }
        Some(path) => {
            fs::write(path, body)?;
            Ok(())
        }
    }
}

fn boundedness_name(b: Boundedness) -> &'static str {
    match b {
        Boundedness::Bounded => "bounded",
        Boundedness::Unbounded => "unbounded",
        Boundedness::Inconclusive => "inconclusive",
    }
}

fn estimate_json(label: &str, r: &EstimateResult) -> serde_json::Value {
    json!({
        "estimator": label,
        "estimate": r.estimate,
        "criterion_value": r.criterion_value,
        "stationarity_residual": r.stationarity_residual,
        "iterations": r.iterations,
        "converged": r.converged,
        "local_optima": r.local_optima.iter()
            .map(|(t, v)| json!({"theta": t, "value": v}))
            .collect::<Vec<_>>(),
    })
}

fn require(opt: Option<f64>, flag: &str, kind: &str) -> Result<f64> {
    opt.ok_or_else(|| Error::Config(format!("{flag} is required for --estimator {kind}")))
}

/// Executes a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Influence(a) => cmd_influence(a),
        Command::Are(a) => cmd_are(a),
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::LevelCurve(a) => cmd_level_curve(a),
        Command::AdaptiveAlpha(a) => cmd_adaptive_alpha(a),
    }
}

fn cmd_estimate(a: EstimateArgs) -> Result<()> {
    let model = a.model.build()?;
    let sample = read_sample(&a.input)?;
    let bx = a.search.build()?;
    let (label, result) = match a.estimator {
        EstimatorKind::Dphi => {
            let gamma = require(a.gamma, "--gamma", "dphi")?;
            let alpha = require(a.alpha, "--alpha", "dphi")?;
            let criterion = DualCriterion::new(CressieRead::new(gamma)?, model, alpha)?;
            ("dphi", dphi_estimate(&criterion, &sample, bx.as_ref())?)
        }
        EstimatorKind::Mdphi => {
            let gamma = require(a.gamma, "--gamma", "mdphi")?;
            let cr = CressieRead::new(gamma)?;
            ("mdphi", mdphi_estimate(&cr, &model, &sample, bx.as_ref())?)
        }
        EstimatorKind::Mdpde => {
            let beta = require(a.beta, "--beta", "mdpde")?;
            ("mdpde", mdpde(&model, &sample, beta, bx.as_ref())?)
        }
        EstimatorKind::Mle => ("mle", mle(&model, &sample, bx.as_ref())?),
    };
    println!("{:#}", estimate_json(label, &result));
    Ok(())
}

fn cmd_influence(a: InfluenceArgs) -> Result<()> {
    let model = a.model.build()?;
    let criterion = DualCriterion::new(CressieRead::new(a.gamma)?, model, a.alpha)?;
    let profile = InfluenceProfile::new(&criterion, a.target.into(), a.theta0)?;
    let values: Vec<serde_json::Value> = a
        .x
        .iter()
        .map(|&x| json!({"x": x, "value": profile.if_value(x)}))
        .collect();
    let ges = profile.ges();
    println!(
        "{:#}",
        json!({
            "target": format!("{:?}", profile.target()).to_lowercase(),
            "theta0": profile.theta0(),
            "gamma": a.gamma,
            "alpha": a.alpha,
            "asymptotic_variance": profile.asymptotic_variance(),
            "are": profile.are(),
            "fisher_information": profile.fisher_information(),
            "population_divergence": profile.population_divergence(),
            "gross_error_sensitivity": {
                "verdict": boundedness_name(ges.verdict),
                "value": ges.value,
                "witness_x": ges.witness_x,
            },
            "influence": values,
        })
    );
    Ok(())
}

fn cmd_are(a: AreArgs) -> Result<()> {
    let model = a.model.build()?;
    let criterion = DualCriterion::new(CressieRead::new(a.gamma)?, model.clone(), a.alpha)?;
    let (variance, are) = asymptotic_variance_and_are(&criterion, a.theta0)?;
    println!(
        "{:#}",
        json!({
            "gamma": a.gamma,
            "alpha": a.alpha,
            "theta0": a.theta0,
            "asymptotic_variance": variance,
            "are": are,
            "fisher_information": model.fisher_information(a.theta0)?,
        })
    );
    Ok(())
}

fn cmd_test(a: TestArgs) -> Result<()> {
    let model = a.model.build()?;
    let sample = read_sample(&a.input)?;
    let criterion = DualCriterion::new(CressieRead::new(a.gamma)?, model, a.alpha)?;
    let config = TestConfig::new(criterion, a.theta0, a.level, sample.len())?;
    let bx = a.search.build()?;
    let outcome = test_statistic_with_box(&config, &sample, bx.as_ref())?;
    println!(
        "{:#}",
        json!({
            "statistic": outcome.statistic,
            "critical_value": outcome.critical_value,
            "threshold_k_n": outcome.threshold_k_n,
            "reject": outcome.reject,
            "divergence_estimate": outcome.divergence_estimate,
            "theta_hat": outcome.theta_hat,
            "level": a.level,
            "n": sample.len(),
        })
    );
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let cfg: SimulateConfig = load_config(&a.config)?;
    let model = Model::from_name(&cfg.model.name, cfg.model.known)?;
    let search_box = cfg.search_box.as_ref().map(|b| b.build()).transpose()?;
    let mut n_s = cfg.n_s;
    if a.fast {
        n_s = 1000;
    }
    if let Some(ns) = a.ns {
        n_s = ns;
    }
    let mc = McConfig {
        model,
        theta0: cfg.theta0,
        n: a.n.unwrap_or(cfg.n),
        n_s,
        base_seed: a.seed,
        estimators: cfg.estimators,
        contamination: cfg.contamination,
        search_box,
    };
    let summaries = run_mc(&mc)?;
    let rows = rows_from_summaries(&mc, &summaries);
    let mut body = Vec::new();
    match a.format {
        OutputFormat::Csv => write_csv(&rows, &mut body)?,
        OutputFormat::Json => {
            write_json(&rows, &mut body)?;
            body.push(b'\n');
        }
    }
    write_output(a.out.as_deref(), &body)
}

fn cmd_level_curve(a: LevelCurveArgs) -> Result<()> {
    let cfg: LevelCurveConfig = load_config(&a.config)?;
    let model = Model::from_name(&cfg.model.name, cfg.model.known)?;
    let search_box = cfg.search_box.as_ref().map(|b| b.build()).transpose()?;
    let mut n_s = cfg.n_s;
    if a.fast {
        n_s = 1000;
    }
    let levels = a
        .levels
        .or(cfg.levels)
        .unwrap_or_else(|| (1..=10).map(|i| i as f64 / 100.0).collect());

    let criterion = DualCriterion::new(CressieRead::new(cfg.gamma)?, model, cfg.alpha)?;
    // the placeholder nominal level is never used: the curve spans `levels`
    let test = TestConfig::new(criterion, cfg.theta0, 0.05, cfg.n)?;
    let mc = McConfig {
        model,
        theta0: cfg.theta0,
        n: cfg.n,
        n_s,
        base_seed: a.seed,
        estimators: Vec::new(),
        contamination: cfg.contamination,
        search_box,
    };
    let points = level_curve(&mc, &test, &levels)?;

    let mut body = Vec::new();
    match a.format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(&mut body);
            w.write_record(["alpha0", "actual", "relative_error"])?;
            for p in &points {
                w.serialize(p)?;
            }
            w.flush()?;
            drop(w);
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut body, &points)?;
            body.push(b'\n');
        }
    }
    write_output(a.out.as_deref(), &body)
}

fn cmd_adaptive_alpha(a: AdaptiveAlphaArgs) -> Result<()> {
    let model = a.model.build()?;
    let sample = read_sample(&a.input)?;
    let bx = a.search.build()?;
    let cr = CressieRead::new(a.gamma)?;
    let report = adaptive_alpha(&cr, &model, &sample, &a.alpha_grid, bx.as_ref())?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    io::stdout().write_all(text.as_bytes())?;
    Ok(())
}
