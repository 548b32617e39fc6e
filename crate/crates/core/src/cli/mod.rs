//! Batch command-line front end.
//!
//! Exit codes: 0 on success, 2 for input or usage errors, 3 for numerical
//! failures. Errors are printed to stderr as one line,
//! `error: category=<input|numerical> message=<detail>`.

mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use crate::data::{
    load_dataset, load_labels, make_synthetic_shift, write_dataset, write_labels, write_matrix,
    DomainPair, StandardizeMode,
};
use crate::error::{Error, ErrorCategory, Result};
use crate::pipeline::{
    baseline_knn_pca, baseline_knn_raw, empirical_mmd, evaluate, fit, knn1_predict, load_model,
    save_model, AdaptationConfig, Domain, FitResult, GRID_DIMS, GRID_RULES, GRID_TRADEOFFS,
};

pub use report::{Baselines, GridEntry, GridSummary, RunReport, Timings};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fuzzy-transfer", version, about = "Fuzzy-system transfer representation learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn an adaptation model from a labeled source and an unlabeled target.
    Fit(FitArgs),
    /// Map a dataset into the learned feature space.
    Transform(TransformArgs),
    /// Score predictions, or 1NN on transformed features, against ground truth.
    Eval(EvalArgs),
    /// Write a synthetic shifted domain pair.
    Synth(SynthArgs),
    /// Generate a synthetic pair and run the model plus both baselines on it.
    Bench(BenchArgs),
}

/// Model parameters; unset flags fall back to the config file, then defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// JSON file with any of: rules, dim, alpha, beta, lambda, iterations, standardize.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of fuzzy rules K.
    #[arg(long)]
    pub rules: Option<usize>,
    /// Output dimension m.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Number of pseudo-label iterations T.
    #[arg(long)]
    pub iters: Option<usize>,
    /// per-domain, pooled or off.
    #[arg(long)]
    pub standardize: Option<StandardizeMode>,
    /// Sweep the parameter grids; axes fixed by explicit flags are not swept.
    #[arg(long)]
    pub grid: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    /// Name of the label column in the source (and truth) files.
    #[arg(long, default_value = "label")]
    pub label_column: String,
    /// Optional target ground truth, used only for reporting.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Output directory for model.json, report.json and predictions.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Label column to skip in the data file, if any.
    #[arg(long)]
    pub label_column: Option<String>,
    /// source or target.
    #[arg(long)]
    pub domain: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth label file.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, default_value = "label")]
    pub label_column: String,
    /// Predicted labels to score directly.
    #[arg(long, conflicts_with_all = ["train", "test"])]
    pub predictions: Option<PathBuf>,
    /// Transformed training features (1NN mode).
    #[arg(long, requires_all = ["train_labels", "test"])]
    pub train: Option<PathBuf>,
    /// File holding the training labels in `--label-column`.
    #[arg(long)]
    pub train_labels: Option<PathBuf>,
    /// Transformed test features (1NN mode).
    #[arg(long)]
    pub test: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub n_per_class: usize,
    /// Translation of the target, `x,y`.
    #[arg(long, default_value = "3,0", value_delimiter = ',', allow_hyphen_values = true)]
    pub shift: Vec<f64>,
    /// Rotation of the target in radians.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub rotation: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub n_per_class: usize,
    #[arg(long, default_value = "3,0", value_delimiter = ',', allow_hyphen_values = true)]
    pub shift: Vec<f64>,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub rotation: f64,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Optional output directory for model.json and report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let category = e.category();
            let message = e.to_string().replace('\n', " ");
            eprintln!("error: category={} message={message}", category.as_str());
            match category {
                ErrorCategory::Input => EXIT_INPUT,
                ErrorCategory::Numerical => EXIT_NUMERICAL,
            }
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(args) => cmd_fit(&args).map(|_| ()),
        Command::Transform(args) => cmd_transform(&args),
        Command::Eval(args) => cmd_eval(&args).map(|acc| println!("{{\"accuracy\": {acc}}}")),
        Command::Synth(args) => cmd_synth(&args),
        Command::Bench(args) => cmd_bench(&args).map(|_| ()),
    }
}

// ---------------------------------------------------------------------------
// Parameter resolution

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    rules: Option<usize>,
    dim: Option<usize>,
    alpha: Option<f64>,
    beta: Option<f64>,
    lambda: Option<f64>,
    iterations: Option<usize>,
    standardize: Option<StandardizeMode>,
}

/// Effective parameters: each field is `Some` when set by a flag or the config
/// file.
#[derive(Debug, Default, Clone, Copy)]
struct Overrides {
    rules: Option<usize>,
    dim: Option<usize>,
    alpha: Option<f64>,
    beta: Option<f64>,
    lambda: Option<f64>,
    iterations: Option<usize>,
    standardize: Option<StandardizeMode>,
}

fn resolve_overrides(params: &ParamArgs) -> Result<Overrides> {
    let file = match &params.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            serde_json::from_str::<ConfigFile>(&text)
                .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    Ok(Overrides {
        rules: params.rules.or(file.rules),
        dim: params.dim.or(file.dim),
        alpha: params.alpha.or(file.alpha),
        beta: params.beta.or(file.beta),
        lambda: params.lambda.or(file.lambda),
        iterations: params.iters.or(file.iterations),
        standardize: params.standardize.or(file.standardize),
    })
}

/// Single configuration for input dimension `d`. An unset output dimension
/// is the default capped at `K(d+1)`.
fn single_config(o: &Overrides, d: usize) -> AdaptationConfig {
    let base = AdaptationConfig::default();
    let rules = o.rules.unwrap_or(base.rules);
    AdaptationConfig {
        rules,
        dim: o.dim.unwrap_or(base.dim.min(rules * (d + 1))),
        alpha: o.alpha.unwrap_or(base.alpha),
        beta: o.beta.unwrap_or(base.beta),
        lambda: o.lambda.unwrap_or(base.lambda),
        iterations: o.iterations.unwrap_or(base.iterations),
        standardize: o.standardize.unwrap_or(base.standardize),
    }
}

/// Canonically ordered grid: rules, dim, alpha, beta, lambda (outer to inner).
fn grid_configs(o: &Overrides, d: usize) -> Vec<AdaptationConfig> {
    let base = AdaptationConfig::default();
    let axis = |v: Option<f64>| v.map_or(GRID_TRADEOFFS.to_vec(), |x| vec![x]);
    let rules_axis = o.rules.map_or(GRID_RULES.to_vec(), |k| vec![k]);
    let (alphas, betas, lambdas) = (axis(o.alpha), axis(o.beta), axis(o.lambda));
    let mut out = Vec::new();
    for &rules in &rules_axis {
        let max_dim = rules * (d + 1);
        let dims = match o.dim {
            Some(m) => vec![m],
            None => {
                let fitting: Vec<usize> = GRID_DIMS.iter().copied().filter(|&m| m <= max_dim).collect();
                if fitting.is_empty() {
                    vec![max_dim]
                } else {
                    fitting
                }
            }
        };
        for &dim in &dims {
            for &alpha in &alphas {
                for &beta in &betas {
                    for &lambda in &lambdas {
                        out.push(AdaptationConfig {
                            rules,
                            dim,
                            alpha,
                            beta,
                            lambda,
                            iterations: o.iterations.unwrap_or(base.iterations),
                            standardize: o.standardize.unwrap_or(base.standardize),
                        });
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Commands

/// Shared body of `fit` and `bench`: optional grid search, final fit,
/// baselines and report assembly.
fn run_experiment(
    command: &str,
    pair: &DomainPair,
    truth: Option<&[String]>,
    params: &ParamArgs,
    mut timings: Timings,
) -> Result<(FitResult, RunReport)> {
    let overrides = resolve_overrides(params)?;
    let d = pair.d();

    let (config, grid) = if params.grid {
        let start = Instant::now();
        let configs = grid_configs(&overrides, d);
        let (best, summary) = grid_search(pair, truth, &configs)?;
        timings.record("grid", start);
        (best, Some(summary))
    } else {
        let config = single_config(&overrides, d);
        config.validate(d)?;
        (config, None)
    };

    let start = Instant::now();
    let result = fit(pair, &config)?;
    timings.record("fit", start);

    let target_accuracy = truth
        .map(|t| evaluate(&result.target_labels(), t))
        .transpose()?;

    let start = Instant::now();
    let baselines = match truth {
        Some(t) => Some(Baselines {
            knn_raw: evaluate(&baseline_knn_raw(pair, config.standardize)?, t)?,
            knn_pca: evaluate(&baseline_knn_pca(pair, config.standardize, config.dim)?, t)?,
        }),
        None => None,
    };
    timings.record("baselines", start);

    let standardized = crate::data::standardize(pair, config.standardize)?;
    let raw_mmd = empirical_mmd(
        standardized.source().features(),
        standardized.target().features(),
        None,
    )?
    .marginal;

    let report = RunReport {
        command: command.to_owned(),
        config,
        n_source: pair.source().n(),
        n_target: pair.target().n(),
        input_dim: d,
        classes: result.model.classes.names().to_vec(),
        iterations: result.model.diagnostics.clone(),
        target_accuracy,
        baselines,
        raw_marginal_mmd: raw_mmd,
        grid,
        timings_ms: timings,
    };
    Ok((result, report))
}

fn grid_search(
    pair: &DomainPair,
    truth: Option<&[String]>,
    configs: &[AdaptationConfig],
) -> Result<(AdaptationConfig, GridSummary)> {
    let d = pair.d();
    let entries: Vec<GridEntry> = configs
        .par_iter()
        .map(|config| {
            let outcome = config.validate(d).and_then(|_| fit(pair, config)).and_then(|r| {
                let acc = truth
                    .map(|t| evaluate(&r.target_labels(), t))
                    .transpose()?;
                let objective = r.model.diagnostics.last().map(|it| it.objective);
                Ok((acc, objective))
            });
            match outcome {
                Ok((target_accuracy, final_objective)) => GridEntry {
                    config: *config,
                    target_accuracy,
                    final_objective,
                    error: None,
                },
                Err(e) => GridEntry {
                    config: *config,
                    target_accuracy: None,
                    final_objective: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let by_accuracy = truth.is_some();
    let mut best: Option<&GridEntry> = None;
    for e in entries.iter().filter(|e| e.error.is_none()) {
        let better = match best {
            None => true,
            Some(b) if by_accuracy => e.target_accuracy > b.target_accuracy,
            Some(b) => e.final_objective.unwrap_or(f64::INFINITY)
                < b.final_objective.unwrap_or(f64::INFINITY),
        };
        if better {
            best = Some(e);
        }
    }
    let best = best
        .ok_or_else(|| Error::Numerical("no grid configuration could be fitted".into()))?
        .config;
    Ok((
        best,
        GridSummary {
            selection: if by_accuracy { "target-accuracy" } else { "objective" }.to_owned(),
            evaluated: entries.len(),
            best,
            results: entries,
        },
    ))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_outputs(dir: &Path, result: &FitResult, report: &RunReport) -> Result<()> {
    create_dir(dir)?;
    save_model(&result.model, dir.join("model.json"))?;
    report.save(dir.join("report.json"))?;
    write_labels(dir.join("predictions.csv"), "label", &result.target_labels())
}

pub fn cmd_fit(args: &FitArgs) -> Result<RunReport> {
    let mut timings = Timings::default();
    let start = Instant::now();
    let source = load_dataset(&args.source, Some(&args.label_column))?;
    let target = load_dataset(&args.target, None)?;
    let pair = DomainPair::new(source, target)?;
    let truth = args
        .truth
        .as_ref()
        .map(|p| load_labels(p, &args.label_column))
        .transpose()?;
    if let Some(t) = &truth {
        if t.len() != pair.target().n() {
            return Err(Error::mismatch(format!(
                "{} ground-truth labels for {} target rows",
                t.len(),
                pair.target().n()
            )));
        }
    }
    timings.record("load", start);

    let (result, report) = run_experiment("fit", &pair, truth.as_deref(), &args.params, timings)?;
    write_outputs(&args.out, &result, &report)?;
    println!("{}", report.summary_line());
    Ok(report)
}

pub fn cmd_transform(args: &TransformArgs) -> Result<()> {
    let domain: Domain = args.domain.parse()?;
    let model = load_model(&args.model)?;
    let data = load_dataset(&args.data, args.label_column.as_deref())?;
    let z = crate::pipeline::transform(&model, &data, domain)?;
    let header: Vec<String> = (1..=z.ncols()).map(|j| format!("z{j}")).collect();
    write_matrix(&args.out, &header, &z)
}

/// Returns the accuracy against `--truth`.
pub fn cmd_eval(args: &EvalArgs) -> Result<f64> {
    let truth = load_labels(&args.truth, &args.label_column)?;
    let predicted = match (&args.predictions, &args.train, &args.train_labels, &args.test) {
        (Some(p), _, _, _) => load_labels(p, &args.label_column)?,
        (None, Some(train), Some(train_labels), Some(test)) => {
            let train = load_dataset(train, None)?;
            let labels = load_labels(train_labels, &args.label_column)?;
            let test = load_dataset(test, None)?;
            knn1_predict(train.features(), &labels, test.features())?
        }
        _ => {
            return Err(Error::invalid(
                "eval needs either --predictions or --train, --train-labels and --test",
            ))
        }
    };
    evaluate(&predicted, &truth)
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let sp = make_synthetic_shift(args.seed, args.n_per_class, &args.shift, args.rotation)?;
    create_dir(&args.out)?;
    write_dataset(args.out.join("source.csv"), sp.pair.source(), "label")?;
    write_dataset(args.out.join("target.csv"), sp.pair.target(), "label")?;
    write_labels(args.out.join("target_truth.csv"), "label", &sp.target_truth)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<RunReport> {
    let mut timings = Timings::default();
    let start = Instant::now();
    let sp = make_synthetic_shift(args.seed, args.n_per_class, &args.shift, args.rotation)?;
    timings.record("synth", start);
    let (result, report) = run_experiment(
        "bench",
        &sp.pair,
        Some(&sp.target_truth),
        &args.params,
        timings,
    )?;
    if let Some(dir) = &args.out {
        write_outputs(dir, &result, &report)?;
    }
    println!("{}", report.summary_line());
    Ok(report)
}
