//! Command-line front end.
//!
//! Subcommands: `estimate`, `compare`, `experiment`, `fit-r`. The seed is
//! always explicit — there is no wall-clock fallback — so every run is
//! reproducible. `HEAVYTAIL_WORKERS` overrides `--workers`.
//!
//! Exit codes: 0 ok, 2 usage error, 3 model error, 4 numeric failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{load_factor_model, Model, ModelFile};
use crate::efficiency::{
    estimate_r, fit_lr_curve, run_catastrophe, run_var_c, CatastropheMode, ExperimentConfig,
    ExperimentOutput, LrObservation,
};
use crate::error::{Error, Result};
use crate::estimators::{
    cmc, crude_mc, default_partition_proposals, gaussian_twist, is_partition, EstimateResult,
    Method,
};
use crate::output::{fit_csv, format_float, long_csv, table_csv, write_atomic};
use crate::rng::StreamKey;

#[derive(Debug, Parser)]
#[command(name = "heavytail", version, about = "Tail probabilities of heavy-tailed factor sums")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a tail probability with a single method.
    Estimate(EstimateArgs),
    /// Run every applicable estimator at one (x, n) and emit one CSV row per method.
    Compare(CompareArgs),
    /// Run an efficiency experiment and emit table plus long-format CSV.
    Experiment(ExperimentArgs),
    /// Refit the efficiency rate r from a previously saved long-format CSV.
    FitR(FitRArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    CrudeMc,
    Cmc,
    IsPartition,
    GaussianTwist,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExperimentKind {
    /// Variable deviation bound sweep (x from 100 to 1000).
    VarC,
    /// Catastrophe sweep with the minimum shape pinned to 1.
    CatConstMin,
    /// Catastrophe sweep with varying minimum shape.
    CatVarMin,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Deviation bound x (the twist threshold λ for gaussian-twist).
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub model: PathBuf,
    /// Sample size of the shared CMC reference estimate.
    #[arg(long, default_value_t = 1_000_000)]
    pub n_ref: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub kind: ExperimentKind,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 5e-3)]
    pub kappa: f64,
    /// Outer replications per deviation-probability estimate.
    #[arg(long, default_value_t = 50)]
    pub outer_reps: u64,
    /// log(Λ) evaluations per (x, n) cell.
    #[arg(long, default_value_t = 5)]
    pub lr_reps: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub n_ref: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Destination of the summary table CSV (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Destination of the long-format per-replicate CSV.
    #[arg(long)]
    pub long_output: Option<PathBuf>,
    /// Destination of the per-x fit-diagnostics CSV.
    #[arg(long)]
    pub fit_output: Option<PathBuf>,
    /// Catastrophe modes only: skip rate fitting and report μ alone.
    #[arg(long)]
    pub skip_rate: bool,
}

#[derive(Debug, Args)]
pub struct FitRArgs {
    /// Long-format CSV produced by `experiment`.
    #[arg(long)]
    pub input: PathBuf,
    /// Outer replications per deviation estimate used when the file was written.
    #[arg(long, default_value_t = 50)]
    pub outer_reps: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn resolve_workers(flag: Option<usize>) -> Result<usize> {
    if let Ok(value) = std::env::var("HEAVYTAIL_WORKERS") {
        let parsed: usize = value
            .parse()
            .map_err(|_| Error::Config(format!("HEAVYTAIL_WORKERS is not a count: {value:?}")))?;
        if parsed == 0 {
            return Err(Error::Config("HEAVYTAIL_WORKERS must be >= 1".into()));
        }
        return Ok(parsed);
    }
    Ok(flag.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
    }))
}

fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn estimate_summary_line(r: &EstimateResult, x: f64) -> String {
    format!(
        "method={} x={} n={} estimate={} relative_error={} ci95_halfwidth={}\n",
        r.method,
        format_float(x),
        r.n,
        format_float(r.estimate),
        format_float(r.relative_error()),
        format_float(r.ci_halfwidth(0.95)),
    )
}

fn estimate_csv(r: &EstimateResult, x: f64) -> String {
    format!(
        "method,x,n,estimate,second_moment,relative_error,ci95_halfwidth\n{},{},{},{},{},{},{}\n",
        r.method,
        format_float(x),
        r.n,
        format_float(r.estimate),
        format_float(r.second_moment),
        format_float(r.relative_error()),
        format_float(r.ci_halfwidth(0.95)),
    )
}

fn estimate_json(r: &EstimateResult, x: f64) -> String {
    let value = serde_json::json!({
        "method": r.method.as_str(),
        "x": x,
        "n": r.n,
        "estimate": r.estimate,
        "second_moment": r.second_moment,
        "relative_error": if r.relative_error().is_finite() {
            serde_json::Value::from(r.relative_error())
        } else {
            serde_json::Value::String("inf".into())
        },
        "ci95_halfwidth": r.ci_halfwidth(0.95),
    });
    format!("{value:#}\n")
}

fn run_estimate(args: &EstimateArgs) -> Result<()> {
    let workers = resolve_workers(args.workers)?;
    let stream = StreamKey::new(args.seed);
    let model = ModelFile::load(&args.model)?.into_model()?;
    let result = match (&model, args.method) {
        (Model::Factors(m), MethodArg::CrudeMc) => crude_mc(m, args.x, args.n, &stream, workers)?,
        (Model::Factors(m), MethodArg::Cmc) => cmc(m, args.x, args.n, &stream, workers)?,
        (Model::Factors(m), MethodArg::IsPartition) => {
            let proposals = default_partition_proposals(m)?;
            is_partition(m, &proposals, args.x, args.n, &stream, workers)?
        }
        (Model::GaussianIndex(m), MethodArg::GaussianTwist) => {
            gaussian_twist(m, args.x, args.n, &stream, workers)?
        }
        (Model::GaussianIndex(_), _) => {
            return Err(Error::Malformed(
                "gaussian index models support only --method gaussian-twist".into(),
            ))
        }
        (Model::Factors(_), MethodArg::GaussianTwist) => {
            return Err(Error::Malformed(
                "--method gaussian-twist needs a gaussian index model".into(),
            ))
        }
    };
    print!("{}", estimate_summary_line(&result, args.x));
    if let Some(path) = &args.output {
        let content = match args.format {
            FormatArg::Csv => estimate_csv(&result, args.x),
            FormatArg::Json => estimate_json(&result, args.x),
        };
        write_atomic(path, &content)?;
    }
    Ok(())
}

fn run_compare(args: &CompareArgs) -> Result<()> {
    let workers = resolve_workers(args.workers)?;
    let model = load_factor_model(&args.model)?;
    let root = StreamKey::new(args.seed);
    let mu_ref = cmc(&model, args.x, args.n_ref, &root.child(0), workers)?.estimate;
    let mut results = vec![
        crude_mc(&model, args.x, args.n, &root.child(1), workers)?,
        cmc(&model, args.x, args.n, &root.child(2), workers)?,
    ];
    // Partition importance sampling needs closed-form densities everywhere.
    if model.factors().iter().all(|f| f.has_density()) {
        let proposals = default_partition_proposals(&model)?;
        results.push(is_partition(
            &model,
            &proposals,
            args.x,
            args.n,
            &root.child(3),
            workers,
        )?);
    }
    let mut csv =
        String::from("method,x,n,estimate,second_moment,relative_error,ci95_halfwidth,mu_ref\n");
    for r in &results {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.method,
            format_float(args.x),
            r.n,
            format_float(r.estimate),
            format_float(r.second_moment),
            format_float(r.relative_error()),
            format_float(r.ci_halfwidth(0.95)),
            format_float(mu_ref),
        ));
    }
    emit(args.output.as_deref(), &csv)
}

fn run_experiment(args: &ExperimentArgs) -> Result<()> {
    let config = ExperimentConfig {
        kappa: args.kappa,
        outer_reps: args.outer_reps,
        lr_reps: args.lr_reps,
        n_ref: args.n_ref,
        seed: args.seed,
        workers: resolve_workers(args.workers)?,
    };
    let (key_column, rows, outputs): (&str, _, Vec<ExperimentOutput>) = match args.kind {
        ExperimentKind::VarC => {
            let (rows, output) = run_var_c(&config)?;
            ("x", rows, vec![output])
        }
        ExperimentKind::CatConstMin => {
            let (rows, outputs) =
                run_catastrophe(&config, CatastropheMode::ConstMin, !args.skip_rate)?;
            ("alpha_bar", rows, outputs)
        }
        ExperimentKind::CatVarMin => {
            let (rows, outputs) =
                run_catastrophe(&config, CatastropheMode::VarMin, !args.skip_rate)?;
            ("alpha_min", rows, outputs)
        }
    };
    emit(args.output.as_deref(), &table_csv(key_column, &rows))?;
    if let Some(path) = &args.long_output {
        let records: Vec<_> = outputs.iter().flat_map(|o| o.long.iter().copied()).collect();
        write_atomic(path, &long_csv(&records))?;
    }
    if let Some(path) = &args.fit_output {
        let mut merged = ExperimentOutput {
            curves: Vec::new(),
            long: Vec::new(),
        };
        for o in outputs {
            merged.curves.extend(o.curves);
        }
        write_atomic(path, &fit_csv(&merged))?;
    }
    Ok(())
}

/// One parsed long-format row: (x, n, replicate, method, deviated).
type LongRow = (f64, u64, u64, Method, bool);

fn parse_long_csv(text: &str) -> Result<Vec<LongRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("x,n,replicate,method,estimate,deviated") => {}
        other => {
            return Err(Error::Malformed(format!(
                "unexpected long-format header: {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Malformed(format!("line {}: wrong field count", idx + 2)));
        }
        let bad = |what: &str| Error::Malformed(format!("line {}: bad {what}", idx + 2));
        let x: f64 = fields[0].parse().map_err(|_| bad("x"))?;
        let n: u64 = fields[1].parse().map_err(|_| bad("n"))?;
        let replicate: u64 = fields[2].parse().map_err(|_| bad("replicate"))?;
        let method = match fields[3] {
            "cmc" => Method::Cmc,
            "crude_mc" => Method::CrudeMc,
            other => return Err(Error::Malformed(format!("line {}: unknown method {other}", idx + 2))),
        };
        let deviated = match fields[5] {
            "0" => false,
            "1" => true,
            _ => return Err(bad("deviated flag")),
        };
        rows.push((x, n, replicate, method, deviated));
    }
    Ok(rows)
}

fn run_fit_r(args: &FitRArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input)?;
    let rows = parse_long_csv(&text)?;
    let reps = args.outer_reps;
    // Deviation counts per (x, n, lr-replicate block, method), insertion-ordered.
    let mut cells: Vec<((u64, u64, u64), [u64; 2])> = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    for (x, n, replicate, method, deviated) in rows {
        let xi = match xs.iter().position(|&v| v == x) {
            Some(i) => i as u64,
            None => {
                xs.push(x);
                (xs.len() - 1) as u64
            }
        };
        let key = (xi, n, replicate / reps);
        let slot = match cells.iter_mut().find(|(k, _)| *k == key) {
            Some((_, counts)) => counts,
            None => {
                cells.push((key, [0, 0]));
                &mut cells.last_mut().unwrap().1
            }
        };
        if deviated {
            slot[usize::from(method == Method::CrudeMc)] += 1;
        }
    }
    let curves = xs
        .iter()
        .enumerate()
        .map(|(xi, &x)| {
            let observations: Vec<LrObservation> = cells
                .iter()
                .filter(|((i, _, _), _)| *i == xi as u64)
                .map(|&((_, n, block), [cmc_dev, crude_dev])| LrObservation {
                    n,
                    replicate: block,
                    cmc_deviations: cmc_dev,
                    crude_deviations: crude_dev,
                    log_lambda: crate::efficiency::lr_ratio(cmc_dev, crude_dev, reps),
                })
                .collect();
            fit_lr_curve(x, f64::NAN, observations)
        })
        .collect::<Vec<_>>();
    // Surface the per-x rate on stdout before writing diagnostics.
    for curve in &curves {
        match estimate_r(curve) {
            Ok(r) => println!("x={} r={}", format_float(curve.x), format_float(r)),
            Err(e) => println!("x={} r=unavailable ({e})", format_float(curve.x)),
        }
    }
    let output = ExperimentOutput {
        curves,
        long: Vec::new(),
    };
    emit(args.output.as_deref(), &fit_csv(&output))
}

/// Dispatches a parsed invocation. The caller maps errors to exit codes.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Estimate(args) => run_estimate(args),
        Command::Compare(args) => run_compare(args),
        Command::Experiment(args) => run_experiment(args),
        Command::FitR(args) => run_fit_r(args),
    }
}

/// Exit code for a failed run: 3 for model problems, 4 for numeric ones.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter(_)
        | Error::ReferenceNotHeaviest { .. }
        | Error::IncompatibleTailFamilies
        | Error::NoRegularlyVaryingFactor
        | Error::GaussianFactorUnsupported
        | Error::DrawCountMismatch { .. }
        | Error::ProposalNotDominating { .. }
        | Error::ProposalDensityUnavailable { .. }
        | Error::Malformed(_)
        | Error::Config(_)
        | Error::Io(_) => 3,
        Error::ProbabilityOutOfRange(_)
        | Error::NonPositiveThreshold(_)
        | Error::PropositionInapplicable(_)
        | Error::DegenerateDesign(_)
        | Error::NoExponentialGain { .. } => 4,
    }
}
