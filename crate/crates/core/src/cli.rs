//! The `tailsmooth` command line.
//!
//! Exit codes: 0 success, 1 invalid input, 2 runtime or numeric failure,
//! 3 reference comparison outside tolerance.
//!
//! Every subcommand accepts `--config FILE` with `key = value` lines; keys
//! are the long flag names (or the experiment field names such as
//! `sample_size` and `master_seed`). Flags given on the command line win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::estimators::{empirical_copula_diag_uniform, estimate_many, EstimatorKind};
use crate::io::{parse_config, read_series_file, read_weights_file, write_series};
use crate::models::{ModelSpec, RFactor, Seed};
use crate::montecarlo::{
    reproduce_table1, results_csv, run_experiment_cells, AbiasMode, CellOutcome, ExperimentConfig, LevelRule, ModelCase,
};
use crate::series::{count_crossings, uniformize_empirical, LevelChoice};
use crate::theory::{
    default_u_grid, numeric_lambda_limit, rfactor_pairwise_lambda, rfactor_smoothness, stopped_clock_pairwise_lambda,
    stopped_clock_smoothness, SpectralWeights,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_COMPARISON: i32 = 3;

const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "tailsmooth",
    version,
    about = "Smoothness and lag-one tail dependence of time series at extreme levels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a sample path and write it as `index,value` CSV
    Simulate(SimulateArgs),
    /// Estimate the lag-one tail dependence coefficient of a series
    Estimate(EstimateArgs),
    /// Closed-form pairwise coefficients and smoothness over a block
    Theory(TheoryArgs),
    /// Monte Carlo bias and rmse of the estimators for one model family
    Experiment(ExperimentArgs),
    /// Rerun the published simulation grid and compare with its values
    Table1(Table1Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Mar1,
    Mma1,
    Yarp1,
    Rfactor,
    #[value(name = "stopped_clock", alias = "stopped-clock")]
    StoppedClock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AbiasArg {
    /// mean(|estimate - truth|)
    Mae,
    /// |mean(estimate) - truth|
    Bias,
}

impl From<AbiasArg> for AbiasMode {
    fn from(a: AbiasArg) -> Self {
        match a {
            AbiasArg::Mae => AbiasMode::MeanAbsError,
            AbiasArg::Bias => AbiasMode::AbsBias,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelRuleArg {
    /// F̂(x) = rank / n at the selected order statistic
    Ecdf,
    /// rank / (n + 1) at the selected order statistic
    OrderStatistic,
}

impl From<LevelRuleArg> for LevelRule {
    fn from(a: LevelRuleArg) -> Self {
        match a {
            LevelRuleArg::Ecdf => LevelRule::Ecdf,
            LevelRuleArg::OrderStatistic => LevelRule::OrderStatistic,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Generating process
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    /// Coefficient of mar1 / mma1, in (0, 1)
    #[arg(long)]
    pub c: Option<f64>,
    /// Hold probability of yarp1, in (0, 1)
    #[arg(long)]
    pub p: Option<f64>,
    /// Pareto(III) scale of yarp1 [default: 1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Tail index of yarp1 or rfactor [default: 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Failure probability of stopped_clock, in [0, 1/2)
    #[arg(long)]
    pub q: Option<f64>,
    /// Factor weights for rfactor: one row per factor, one column per time point
    #[arg(long)]
    pub weights_file: Option<PathBuf>,
    /// Series length [default: 1000]
    #[arg(long)]
    pub n: Option<usize>,
    /// Random seed [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV; standard output when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Optional `key = value` file supplying any of the above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Series CSV with header `index,value`
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Comma-separated subset of ff, log, sec, tie [default: ff,log,sec]
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<EstimatorKind>>,
    /// Level as a sample quantile of the series [default: 0.95]
    #[arg(long, conflicts_with = "level")]
    pub quantile: Option<f64>,
    /// Fixed level on the uniform scale instead of a sample quantile
    #[arg(long)]
    pub level: Option<f64>,
    /// How a sample quantile becomes a level [default: ecdf]
    #[arg(long, value_enum)]
    pub level_rule: Option<LevelRuleArg>,
    /// Output CSV; standard output when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Optional `key = value` file supplying any of the above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// rfactor (needs --weights-file) or stopped_clock (needs --q) [default: rfactor]
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    /// Factor weights: one row per factor, one column per time point
    #[arg(long)]
    pub weights_file: Option<PathBuf>,
    /// Tail index of the factors [default: 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Failure probability of the stopped clock, in [0, 1/2)
    #[arg(long)]
    pub q: Option<f64>,
    /// First index n of the block [default: 2]
    #[arg(long)]
    pub block_start: Option<usize>,
    /// Last index m of the block [default: last column - 1, or n + 9]
    #[arg(long)]
    pub block_end: Option<usize>,
    /// Cross-check each coefficient against the numeric limit of the exact joint d.f.
    #[arg(long)]
    pub oracle: bool,
    /// Optional `key = value` file supplying any of the above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Generating process [default: mar1]
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    /// Comma-separated mar1 / mma1 coefficients [default: 0.25,0.5,0.75]
    #[arg(long, value_delimiter = ',')]
    pub c: Option<Vec<f64>>,
    /// Comma-separated yarp1 hold probabilities [default: 0.25,0.5,0.75]
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// Pareto(III) scale of yarp1 [default: 1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Tail index of yarp1 or rfactor [default: 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated stopped_clock failure probabilities
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    /// Factor weights for rfactor
    #[arg(long)]
    pub weights_file: Option<PathBuf>,
    /// Use this value as the true coefficient of every model
    #[arg(long)]
    pub truth: Option<f64>,
    /// Replicas per model [default: 200]
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Length of each replica [default: 1000]
    #[arg(long)]
    pub n: Option<usize>,
    /// Level as a sample quantile [default: 0.95]
    #[arg(long)]
    pub quantile: Option<f64>,
    /// How a sample quantile becomes a level [default: ecdf]
    #[arg(long, value_enum)]
    pub level_rule: Option<LevelRuleArg>,
    /// Master seed; replica r uses stream r [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: available parallelism]
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated subset of ff, log, sec, tie [default: ff,log,sec]
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<EstimatorKind>>,
    /// Meaning of the abias column [default: mae]
    #[arg(long, value_enum)]
    pub abias: Option<AbiasArg>,
    /// Results CSV; standard output when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Optional `key = value` file supplying any of the above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    /// Master seed [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: available parallelism]
    #[arg(long)]
    pub workers: Option<usize>,
    /// Meaning of the abias column [default: mae]
    #[arg(long, value_enum)]
    pub abias: Option<AbiasArg>,
    /// How a sample quantile becomes a level [default: ecdf]
    #[arg(long, value_enum)]
    pub level_rule: Option<LevelRuleArg>,
    /// Results CSV
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Comparison CSV with the published values and differences
    #[arg(long)]
    pub comparison: Option<PathBuf>,
    /// Optional `key = value` file supplying any of the above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Config-file values; every key must be consumed by the subcommand.
struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let values = match path {
            None => BTreeMap::new(),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                parse_config(&text)?
            }
        };
        Ok(Self { values })
    }

    fn raw(&mut self, keys: &[&str]) -> Option<String> {
        let mut found = None;
        for key in keys {
            if let Some(v) = self.values.remove(*key) {
                found.get_or_insert(v);
            }
        }
        found
    }

    /// Command-line value if given, else the config value under any of `keys`.
    fn pick<T: FromStr>(&mut self, cli: Option<T>, keys: &[&str]) -> Result<Option<T>> {
        let from_file = self.raw(keys);
        if cli.is_some() {
            return Ok(cli);
        }
        from_file
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("config key `{}`: cannot parse `{v}`", keys[0])))
            })
            .transpose()
    }

    fn pick_list<T: FromStr>(&mut self, cli: Option<Vec<T>>, keys: &[&str]) -> Result<Option<Vec<T>>> {
        let from_file = self.raw(keys);
        if cli.is_some() {
            return Ok(cli);
        }
        from_file
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        x.trim()
                            .parse()
                            .map_err(|_| Error::Config(format!("config key `{}`: cannot parse `{x}`", keys[0])))
                    })
                    .collect()
            })
            .transpose()
    }

    fn pick_enum<T: ValueEnum>(&mut self, cli: Option<T>, keys: &[&str]) -> Result<Option<T>> {
        let from_file = self.raw(keys);
        if cli.is_some() {
            return Ok(cli);
        }
        from_file
            .map(|v| {
                T::from_str(v.trim(), true)
                    .map_err(|_| Error::Config(format!("config key `{}`: unknown value `{v}`", keys[0])))
            })
            .transpose()
    }

    fn finish(self) -> Result<()> {
        match self.values.keys().next() {
            None => Ok(()),
            Some(k) => Err(Error::Config(format!("unknown config key `{k}`"))),
        }
    }
}

fn required<T>(value: Option<T>, flag: &str, context: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing --{flag} ({context})")))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_rfactor(weights_file: Option<PathBuf>, alpha: f64, context: &str) -> Result<RFactor> {
    let path = required(weights_file, "weights-file", context)?;
    RFactor::new(alpha, read_weights_file(&path)?)
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let mut cfg = Settings::load(args.config.as_deref())?;
    let model = cfg.pick_enum(args.model, &["model"])?;
    let c = cfg.pick(args.c, &["c"])?;
    let p = cfg.pick(args.p, &["p"])?;
    let sigma = cfg.pick(args.sigma, &["sigma"])?.unwrap_or(1.0);
    let alpha = cfg.pick(args.alpha, &["alpha"])?.unwrap_or(1.0);
    let q = cfg.pick(args.q, &["q"])?;
    let weights_file = cfg.pick(args.weights_file, &["weights_file"])?;
    let n = cfg.pick(args.n, &["n", "sample_size"])?.unwrap_or(1000);
    let seed = cfg.pick(args.seed, &["seed", "master_seed"])?.unwrap_or(DEFAULT_SEED);
    let output = cfg.pick(args.output, &["output"])?;
    cfg.finish()?;

    let model = required(model, "model", "simulate")?;
    let spec = match model {
        ModelName::Mar1 => ModelSpec::Mar1 {
            c: required(c, "c", "model mar1")?,
        },
        ModelName::Mma1 => ModelSpec::Mma1 {
            c: required(c, "c", "model mma1")?,
        },
        ModelName::Yarp1 => ModelSpec::Yarp1 {
            p: required(p, "p", "model yarp1")?,
            sigma,
            alpha,
        },
        ModelName::Rfactor => ModelSpec::RFactor(load_rfactor(weights_file, alpha, "model rfactor")?),
        ModelName::StoppedClock => ModelSpec::StoppedClock {
            q: required(q, "q", "model stopped_clock")?,
        },
    };
    let series = spec.simulate(n, Seed::new(seed, 0))?;
    let note = match spec.true_lambda() {
        Some(l) => format!("lambda={l}"),
        None => "lambda=n/a".to_string(),
    };
    match output {
        Some(path) => {
            write_series(&series, open_output(Some(&path))?)?;
            println!("{note}");
        }
        None => {
            write_series(&series, open_output(None)?)?;
            eprintln!("{note}");
        }
    }
    Ok(EXIT_OK)
}

fn cmd_estimate(args: EstimateArgs) -> Result<i32> {
    let mut cfg = Settings::load(args.config.as_deref())?;
    let input = cfg.pick(args.input, &["input"])?;
    let kinds = cfg.pick_list(args.estimators, &["estimators"])?;
    let quantile = cfg.pick(args.quantile, &["quantile"])?;
    let level = cfg.pick(args.level, &["level"])?;
    let rule = cfg.pick_enum(args.level_rule, &["level_rule"])?;
    let output = cfg.pick(args.output, &["output"])?;
    cfg.finish()?;

    let input = required(input, "input", "estimate")?;
    let kinds = kinds.unwrap_or_else(|| EstimatorKind::LEVEL_BASED.to_vec());
    if kinds.is_empty() {
        return Err(Error::Config("no estimators selected".into()));
    }
    let choice = match (level, quantile) {
        (Some(_), Some(_)) => return Err(Error::Config("give either --level or --quantile, not both".into())),
        (Some(u), None) => LevelChoice::Fixed(u),
        (None, q) => LevelRule::from(rule.unwrap_or(LevelRuleArg::Ecdf)).choice(q.unwrap_or(0.95)),
    };

    let series = read_series_file(&input)?;
    let useries = uniformize_empirical(&series)?;
    let resolved = choice.resolve(&useries)?;
    let counts = count_crossings(&useries, resolved);
    let diag = empirical_copula_diag_uniform(&useries, resolved);
    let reports = estimate_many(&series, choice, &kinds)?;

    let mut writer = csv::Writer::from_writer(open_output(output.as_deref())?);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    writer
        .write_record(["estimator", "u", "value", "U", "E", "Cn"])
        .map_err(csv_err)?;
    let mut undefined = Vec::new();
    for (kind, report) in reports {
        let value = match report {
            Ok(r) => r.value.to_string(),
            Err(e) => {
                undefined.push(format!("{kind}: {e}"));
                String::new()
            }
        };
        let row = if kind == EstimatorKind::Tie {
            [
                kind.to_string(),
                String::new(),
                value,
                String::new(),
                String::new(),
                String::new(),
            ]
        } else {
            [
                kind.to_string(),
                resolved.u().to_string(),
                value,
                counts.upcrossings.to_string(),
                counts.exceedances.to_string(),
                diag.to_string(),
            ]
        };
        writer.write_record(&row).map_err(csv_err)?;
    }
    writer.flush()?;
    if undefined.is_empty() {
        Ok(EXIT_OK)
    } else {
        for line in undefined {
            eprintln!("error: {line}");
        }
        Ok(EXIT_RUNTIME)
    }
}

fn cmd_theory(args: TheoryArgs) -> Result<i32> {
    let mut cfg = Settings::load(args.config.as_deref())?;
    let model = cfg.pick_enum(args.model, &["model"])?.unwrap_or(ModelName::Rfactor);
    let weights_file = cfg.pick(args.weights_file, &["weights_file"])?;
    let alpha = cfg.pick(args.alpha, &["alpha"])?.unwrap_or(1.0);
    let q = cfg.pick(args.q, &["q"])?;
    let block_start = cfg.pick(args.block_start, &["block_start"])?.unwrap_or(2);
    let block_end = cfg.pick(args.block_end, &["block_end"])?;
    let oracle = args.oracle || cfg.pick(None, &["oracle"])?.unwrap_or(false);
    cfg.finish()?;

    let grid = default_u_grid();
    let mut out = std::io::stdout().lock();
    match model {
        ModelName::Rfactor => {
            let rf = load_rfactor(weights_file, alpha, "theory for rfactor")?;
            let weights = SpectralWeights::from_model(&rf);
            let n = block_start;
            let m = block_end.unwrap_or(weights.times().saturating_sub(1));
            let s = rfactor_smoothness(&weights, n, m)?;
            let mut worst: f64 = 0.0;
            for i in n..=m {
                for j in [i - 1, i + 1] {
                    let lam = rfactor_pairwise_lambda(&weights, i, j)?;
                    if oracle {
                        let tail = |u: f64| {
                            let xi = rf.marginal_quantile(i, u).unwrap_or(f64::NAN);
                            let xj = rf.marginal_quantile(j, u).unwrap_or(f64::NAN);
                            rf.joint_cdf(i, j, xi, xj).unwrap_or(f64::NAN)
                        };
                        let limit = numeric_lambda_limit(tail, &grid)?;
                        let d = (limit.value - lam).abs();
                        worst = worst.max(d);
                        writeln!(
                            out,
                            "lambda({j}|{i}) = {lam}  oracle = {}  discrepancy = {d:e}",
                            limit.value
                        )?;
                    } else {
                        writeln!(out, "lambda({j}|{i}) = {lam}")?;
                    }
                }
            }
            writeln!(out, "S({n},{m}) = {}", s.s)?;
            if oracle {
                writeln!(out, "max discrepancy = {worst:e}")?;
            }
        }
        ModelName::StoppedClock => {
            let q = required(q, "q", "theory for stopped_clock")?;
            let lam = stopped_clock_pairwise_lambda(q)?;
            let n = block_start;
            let m = block_end.unwrap_or(n + 9);
            let s = stopped_clock_smoothness(|_| q, n, m)?;
            // P(F(X_i) <= u, F(X_{i+1}) <= u) = q u + (1 - q) u^2
            let limit = if oracle {
                Some(numeric_lambda_limit(|u| q * u + (1.0 - q) * u * u, &grid)?)
            } else {
                None
            };
            for i in n..=m {
                for j in [i - 1, i + 1] {
                    match &limit {
                        Some(l) => writeln!(
                            out,
                            "lambda({j}|{i}) = {lam}  oracle = {}  discrepancy = {:e}",
                            l.value,
                            (l.value - lam).abs()
                        )?,
                        None => writeln!(out, "lambda({j}|{i}) = {lam}")?,
                    }
                }
            }
            writeln!(out, "S({n},{m}) = {}", s.s)?;
            if let Some(l) = limit {
                writeln!(out, "max discrepancy = {:e}", (l.value - lam).abs())?;
            }
        }
        other => {
            return Err(Error::Config(format!(
                "theory supports rfactor and stopped_clock, not {}",
                other
                    .to_possible_value()
                    .map(|v| v.get_name().to_string())
                    .unwrap_or_default()
            )))
        }
    }
    Ok(EXIT_OK)
}

fn report_cells(cells: &[CellOutcome]) -> i32 {
    let mut code = EXIT_OK;
    for cell in cells {
        match cell {
            CellOutcome::Filled(r) if r.skipped > 0 => {
                eprintln!(
                    "note: {} {} {}: {} of {} replicas skipped",
                    r.model,
                    r.param,
                    r.estimator,
                    r.skipped,
                    r.skipped + r.used
                );
            }
            CellOutcome::Empty {
                model,
                param,
                estimator,
                skipped,
                ..
            } => {
                eprintln!("error: EmptyCell {model} {param} {estimator}: all {skipped} replicas skipped");
                code = EXIT_RUNTIME;
            }
            _ => {}
        }
    }
    code
}

fn cmd_experiment(args: ExperimentArgs) -> Result<i32> {
    let mut cfg = Settings::load(args.config.as_deref())?;
    let model = cfg.pick_enum(args.model, &["model"])?.unwrap_or(ModelName::Mar1);
    let cs = cfg.pick_list(args.c, &["c"])?;
    let ps = cfg.pick_list(args.p, &["p"])?;
    let sigma = cfg.pick(args.sigma, &["sigma"])?.unwrap_or(1.0);
    let alpha = cfg.pick(args.alpha, &["alpha"])?.unwrap_or(1.0);
    let qs = cfg.pick_list(args.q, &["q"])?;
    let weights_file = cfg.pick(args.weights_file, &["weights_file"])?;
    let truth = cfg.pick(args.truth, &["truth", "truth_override"])?;
    let replicas = cfg.pick(args.replicas, &["replicas"])?.unwrap_or(200);
    let n = cfg.pick(args.n, &["n", "sample_size"])?.unwrap_or(1000);
    let quantile = cfg.pick(args.quantile, &["quantile"])?.unwrap_or(0.95);
    let rule = cfg
        .pick_enum(args.level_rule, &["level_rule"])?
        .unwrap_or(LevelRuleArg::Ecdf);
    let seed = cfg.pick(args.seed, &["seed", "master_seed"])?.unwrap_or(DEFAULT_SEED);
    let workers = cfg.pick(args.workers, &["workers"])?;
    let estimators = cfg.pick_list(args.estimators, &["estimators"])?;
    let abias = cfg
        .pick_enum(args.abias, &["abias", "abias_mode"])?
        .unwrap_or(AbiasArg::Mae);
    let output = cfg.pick(args.output, &["output"])?;
    cfg.finish()?;

    let grid = vec![0.25, 0.5, 0.75];
    let specs: Vec<ModelSpec> = match model {
        ModelName::Mar1 => cs.unwrap_or(grid).into_iter().map(|c| ModelSpec::Mar1 { c }).collect(),
        ModelName::Mma1 => cs.unwrap_or(grid).into_iter().map(|c| ModelSpec::Mma1 { c }).collect(),
        ModelName::Yarp1 => ps
            .unwrap_or(grid)
            .into_iter()
            .map(|p| ModelSpec::Yarp1 { p, sigma, alpha })
            .collect(),
        ModelName::Rfactor => vec![ModelSpec::RFactor(load_rfactor(weights_file, alpha, "model rfactor")?)],
        ModelName::StoppedClock => required(qs, "q", "model stopped_clock")?
            .into_iter()
            .map(|q| ModelSpec::StoppedClock { q })
            .collect(),
    };
    for spec in &specs {
        spec.validate()?;
    }
    let models = specs
        .into_iter()
        .map(|m| match truth {
            Some(t) => ModelCase::with_truth(m, t),
            None => ModelCase::new(m),
        })
        .collect();
    let config = ExperimentConfig {
        models,
        replicas,
        sample_size: n,
        quantile,
        master_seed: seed,
        estimators: estimators.unwrap_or_else(|| EstimatorKind::LEVEL_BASED.to_vec()),
        workers,
        abias_mode: abias.into(),
        level_rule: rule.into(),
    };
    let cells = run_experiment_cells(&config)?;
    open_output(output.as_deref())?.write_all(results_csv(&cells).as_bytes())?;
    Ok(report_cells(&cells))
}

fn cmd_table1(args: Table1Args) -> Result<i32> {
    let mut cfg = Settings::load(args.config.as_deref())?;
    let seed = cfg.pick(args.seed, &["seed", "master_seed"])?.unwrap_or(DEFAULT_SEED);
    let workers = cfg.pick(args.workers, &["workers"])?;
    let abias = cfg
        .pick_enum(args.abias, &["abias", "abias_mode"])?
        .unwrap_or(AbiasArg::Mae);
    let rule = cfg
        .pick_enum(args.level_rule, &["level_rule"])?
        .unwrap_or(LevelRuleArg::Ecdf);
    let output = cfg.pick(args.output, &["output"])?;
    let comparison = cfg.pick(args.comparison, &["comparison"])?;
    cfg.finish()?;
    if workers == Some(0) {
        return Err(Error::Config("workers must be at least 1".into()));
    }

    let report = reproduce_table1(seed, workers, abias.into(), rule.into())?;
    if let Some(path) = output {
        write_text(&path, &report.results_csv())?;
    }
    if let Some(path) = comparison {
        write_text(&path, &report.comparison_csv())?;
    }
    print!("{}", report.render());
    if report.passes() {
        Ok(EXIT_OK)
    } else {
        let failed = report.failures().count();
        eprintln!("{failed} of {} cells outside tolerance", report.rows.len());
        Ok(EXIT_COMPARISON)
    }
}

pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Theory(a) => cmd_theory(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Table1(a) => cmd_table1(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_RUNTIME
            }
        }
    }
}
