use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dmsel::chordal::{notation, parse_notation};
use dmsel::classify::{default_classifier, evaluate};
use dmsel::estimate::{fit, naive_bayes_graph, DofRule};
use dmsel::experiment::{export_trace, run_experiment, trace_rows, ExperimentConfig};
use dmsel::schema::{parse_dataset, split, Dataset, Fraction};
use dmsel::search::{feature_report, select_model, Direction, SearchConfig};
use dmsel::synth::{gen_synthetic, LevelSpec};
use dmsel::{CriterionConfig, CriterionKind, Error};

#[derive(Parser)]
#[command(
    name = "dmsel",
    version,
    about = "Decomposable model selection for categorical classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select one model by sequential search and score it on a held-out split.
    Select(SelectArgs),
    /// Run every strategy and criterion on one or more datasets.
    Experiment(ExperimentArgs),
    /// Generate data from a randomly parameterized decomposable model.
    Gen(GenArgs),
    /// Evaluate a given model or a baseline on a held-out split.
    Eval(EvalArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Name of the class column.
    #[arg(long, default_value = "S")]
    class_col: String,
    /// Test share, as `a/b` or a decimal.
    #[arg(long, default_value = "1/11")]
    split: Fraction,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ",")]
    delimiter: char,
}

#[derive(Clone, Copy, ValueEnum)]
enum DofArg {
    CliqueCells,
    FittedSupport,
}

impl From<DofArg> for DofRule {
    fn from(d: DofArg) -> Self {
        match d {
            DofArg::CliqueCells => DofRule::CliqueCells,
            DofArg::FittedSupport => DofRule::FittedSupport,
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = CriterionConfig::DEFAULT_REPLICATES)]
    mc_replicates: usize,
    /// Seed for Monte Carlo replicates (defaults to --seed).
    #[arg(long)]
    mc_seed: Option<u64>,
    /// Accept FSS moves when p > alpha and BSS moves when p < alpha.
    #[arg(long)]
    literal_alpha_rule: bool,
    #[arg(long, value_enum, default_value = "clique-cells")]
    dof_rule: DofArg,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    data_args: DataArgs,
    #[arg(long, default_value = "bss")]
    direction: Direction,
    #[arg(long, default_value = "aic")]
    criterion: CriterionKind,
    #[arg(long, default_value_t = CriterionConfig::DEFAULT_ALPHA)]
    alpha: f64,
    #[command(flatten)]
    search: SearchArgs,
    /// Write the accepted models, scored on the test share, to this file.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Dataset file; repeat for several.
    #[arg(long, required = true)]
    data: Vec<PathBuf>,
    #[command(flatten)]
    data_args: DataArgs,
    /// Significance levels, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.0001")]
    alpha: Vec<f64>,
    #[command(flatten)]
    search: SearchArgs,
    /// Write per-cell results as delimited text.
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Generating model in clique notation, e.g. "(F1 S)(F2 F3 S)".
    #[arg(long)]
    model: String,
    /// Level counts: a default and/or NAME=K overrides.
    #[arg(long, default_value = "2")]
    levels: LevelSpec,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Variable placed in the last column.
    #[arg(long, default_value = "S")]
    class_col: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Default,
    NaiveBayes,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    data_args: DataArgs,
    /// Model in clique notation over the dataset's column names.
    #[arg(
        long,
        conflicts_with = "baseline",
        required_unless_present = "baseline"
    )]
    model: Option<String>,
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn load(path: &Path, args: &DataArgs) -> Result<Dataset, Error> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_dataset(&text, &args.class_col, args.delimiter)
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn select(args: SelectArgs) -> Result<(), Error> {
    let ds = load(&args.data, &args.data_args)?;
    let (train, test) = split(&ds, args.data_args.split, args.data_args.seed)?;
    let criterion = CriterionConfig {
        kind: args.criterion,
        alpha: args.alpha,
        mc_replicates: args.search.mc_replicates,
        seed: args.search.mc_seed.unwrap_or(args.data_args.seed),
    };
    let mut config = SearchConfig::new(args.direction, criterion);
    config.literal_alpha_rule = args.search.literal_alpha_rule;
    config.dof_rule = args.search.dof_rule.into();
    let result = select_model(&train, &config)?;
    let schema = train.schema();
    let model = notation(
        &result.final_model,
        &schema.names(),
        Some(schema.class_index()),
    )?;
    let metrics = evaluate(&fit(&train, &result.final_model)?, &test)?;
    let features = feature_report(&result.final_model, schema);

    println!("model: {model}");
    println!("complexity: {}", result.final_model.complexity());
    println!("steps: {}", result.trace.len() - 1);
    println!("stop: {}", result.stop_reason.name());
    println!("retained: {}", features.retained.join(" "));
    println!("dropped: {}", features.dropped.join(" "));
    println!("accuracy: {}", metrics.accuracy);
    println!("recall: {}", metrics.recall);
    println!("n_train: {}", train.total());
    println!("n_test: {}", test.total());

    if let Some(path) = &args.trace_out {
        let rows = trace_rows(&result, &train, &test)?;
        write(path, &export_trace(&rows, args.data_args.delimiter))?;
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<(), Error> {
    let mut sets = Vec::new();
    for path in &args.data {
        sets.push((dataset_name(path), load(path, &args.data_args)?));
    }
    let config = ExperimentConfig {
        split: args.data_args.split,
        seed: args.data_args.seed,
        mc_seed: args.search.mc_seed,
        alphas: args.alpha,
        mc_replicates: args.search.mc_replicates,
        literal_alpha_rule: args.search.literal_alpha_rule,
        dof_rule: args.search.dof_rule.into(),
    };
    let report = run_experiment(&sets, &config)?;
    print!("{}", report.render_table());
    if let Some(path) = &args.report_out {
        write(path, &report.to_delimited(args.data_args.delimiter))?;
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), Error> {
    let generated = gen_synthetic(
        &args.model,
        &args.levels,
        args.n,
        args.seed,
        Some(&args.class_col),
    )?;
    match &args.out {
        Some(path) => {
            write(path, &generated.text)?;
            println!("model: {}", generated.notation);
        }
        None => print!("{}", generated.text),
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), Error> {
    let ds = load(&args.data, &args.data_args)?;
    let (train, test) = split(&ds, args.data_args.split, args.data_args.seed)?;
    let schema = train.schema();
    let (metrics, graph) = match (args.baseline, &args.model) {
        (Some(Baseline::Default), _) => (evaluate(&default_classifier(&train), &test)?, None),
        (Some(Baseline::NaiveBayes), _) => {
            let g = naive_bayes_graph(schema);
            (evaluate(&fit(&train, &g)?, &test)?, Some(g))
        }
        (None, Some(text)) => {
            let g = parse_notation(text, &schema.names())?;
            (evaluate(&fit(&train, &g)?, &test)?, Some(g))
        }
        (None, None) => return Err(Error::InvalidConfig("give --model or --baseline".into())),
    };
    if let Some(g) = &graph {
        println!(
            "model: {}",
            notation(g, &schema.names(), Some(schema.class_index()))?
        );
        println!("complexity: {}", g.complexity());
    }
    println!("accuracy: {}", metrics.accuracy);
    println!("recall: {}", metrics.recall);
    println!("n_test: {}", metrics.n_test);
    Ok(())
}

fn error_line(code: &str, message: &str) {
    eprintln!(
        "{}",
        serde_json::json!({ "error": code, "message": message })
    );
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            error_line("usage", e.to_string().trim_end());
            return ExitCode::from(2);
        }
    };
    let outcome = match cli.command {
        Command::Select(a) => select(a),
        Command::Experiment(a) => experiment(a),
        Command::Gen(a) => gen(a),
        Command::Eval(a) => eval(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error_line(e.code(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}
