use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pulsefalsify::harness::{aggregate, render_table, run_experiment, write_sweep_outputs, ExperimentConfig, ResultSet};
use pulsefalsify::optimize::OptimizerKind;
use pulsefalsify::stl::{robustness, Semantics};
use pulsefalsify::system::{load_benchmark_file, Benchmark};
use pulsefalsify::{falsify, parse, read_trace_csv, FreeMask, OptimizerConfig};

/// Falsify STL specifications of simulated systems by searching over
/// pulse-shaped inputs.
#[derive(Debug, Parser)]
#[command(name = "pulsefalsify", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Falsify one spec under one free-parameter mask.
    Run(RunArgs),
    /// Run every (spec, mask, repetition) cell and write the CSV summaries.
    Sweep(SweepArgs),
    /// Evaluate a formula against a recorded trace.
    Monitor(MonitorArgs),
    /// Check a benchmark configuration.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, default_value = "turbo")]
    optimizer: OptimizerKind,
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "classic")]
    semantics: Semantics,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    benchmark: PathBuf,
    #[arg(long)]
    spec: String,
    /// Free pulse parameters, e.g. `W` or `L-P-W`.
    #[arg(long)]
    mask: FreeMask,
    /// Also search the benchmark's static parameters.
    #[arg(long)]
    with_static: bool,
    #[command(flatten)]
    search: SearchArgs,
    /// Where to write the witness JSON when falsified.
    #[arg(long)]
    witness: Option<PathBuf>,
    /// Exit with status 1 when no counterexample is found.
    #[arg(long)]
    expect_falsified: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Benchmark config; repeat for several.
    #[arg(long, required = true)]
    benchmark: Vec<PathBuf>,
    /// Spec names to keep; defaults to all specs of each benchmark.
    #[arg(long, value_delimiter = ',')]
    specs: Vec<String>,
    /// `sweep` for the twelve standard masks, `all` for every subset, or a
    /// comma-separated list such as `W,L-W`.
    #[arg(long, default_value = "sweep")]
    masks: String,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MonitorArgs {
    /// Formula text.
    #[arg(long, conflicts_with = "spec_file", required_unless_present = "spec_file")]
    spec: Option<String>,
    #[arg(long)]
    spec_file: Option<PathBuf>,
    /// CSV with a `time` column and one column per signal.
    #[arg(long)]
    trace: PathBuf,
    /// Evaluation time.
    #[arg(long, default_value_t = 0.0)]
    at: f64,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(required = true)]
    benchmarks: Vec<PathBuf>,
}

fn parse_masks(s: &str) -> Result<Vec<FreeMask>> {
    match s {
        "sweep" => Ok(FreeMask::sweep()),
        "all" => Ok(FreeMask::all_subsets()),
        list => list
            .split(',')
            .map(|m| Ok(m.trim().parse::<FreeMask>()?))
            .collect(),
    }
}

fn load(path: &Path) -> Result<Benchmark> {
    load_benchmark_file(path).with_context(|| format!("loading {}", path.display()))
}

enum Outcome {
    Ok,
    NotFalsified,
}

fn run(args: RunArgs) -> Result<Outcome> {
    let benchmark = load(&args.benchmark)?;
    let mask = args.mask.with_static(args.with_static);
    let optimizer = OptimizerConfig::new(args.search.optimizer, args.search.budget, args.search.seed);
    let outcome = falsify(&benchmark, &args.spec, mask, &optimizer, args.search.semantics)?;
    println!("benchmark: {}", benchmark.name);
    println!("spec: {} = {}", args.spec, benchmark.specs[&args.spec].text);
    println!("mask: {mask} (dimension {})", outcome.dimension);
    println!("falsified: {}", outcome.falsified);
    println!("simulations: {}", outcome.simulations_used);
    println!("best robustness: {}", outcome.best_robustness);
    if let Some(w) = &outcome.witness {
        for (name, p) in w.input_names.iter().zip(&w.decoded.pulses) {
            println!(
                "  {name}: low={} period={} width={} high={} delay={}",
                p.low_n, p.period_n, p.width_n, p.high_n, p.delay_n
            );
        }
        for (name, v) in &w.decoded.statics {
            println!("  {name} = {v}");
        }
        if let Some(path) = &args.witness {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            serde_json::to_writer_pretty(file, w)?;
            println!("witness written to {}", path.display());
        }
    }
    if args.expect_falsified && !outcome.falsified {
        return Ok(Outcome::NotFalsified);
    }
    Ok(Outcome::Ok)
}

fn sweep(args: SweepArgs) -> Result<Outcome> {
    let masks = parse_masks(&args.masks)?;
    let mut results = ResultSet::default();
    for path in &args.benchmark {
        let benchmark = load(path)?;
        let specs: Vec<String> = if args.specs.is_empty() {
            Vec::new()
        } else {
            let kept: Vec<String> = args
                .specs
                .iter()
                .filter(|s| benchmark.specs.contains_key(*s))
                .cloned()
                .collect();
            if kept.is_empty() {
                bail!("{} has none of the requested specs", path.display());
            }
            kept
        };
        let mut config = ExperimentConfig::new(benchmark);
        config.specs = specs;
        config.masks = masks.clone();
        config.repetitions = args.reps;
        config.budget = args.search.budget;
        config.base_seed = args.search.seed;
        config.optimizer = args.search.optimizer;
        config.semantics = args.search.semantics;
        config.parallelism = args.parallel;
        results.extend(run_experiment(&config)?);
    }
    for r in results.records.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: {} {} rep {}: {}",
            r.spec_id(),
            r.mask,
            r.rep,
            r.error.as_deref().unwrap_or_default()
        );
    }
    let written = write_sweep_outputs(&args.out, &results)?;
    print!("{}", render_table(&aggregate(&results)));
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(Outcome::Ok)
}

fn monitor(args: MonitorArgs) -> Result<Outcome> {
    let text = match (&args.spec, &args.spec_file) {
        (Some(s), _) => s.clone(),
        (None, Some(path)) => fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        (None, None) => bail!("one of --spec or --spec-file is required"),
    };
    let formula = parse(&text)?;
    let file = File::open(&args.trace).with_context(|| format!("opening {}", args.trace.display()))?;
    let trace = read_trace_csv(BufReader::new(file)).with_context(|| format!("reading {}", args.trace.display()))?;
    for semantics in [Semantics::Classic, Semantics::Additive] {
        println!("{semantics}: {}", robustness(&formula, &trace, args.at, semantics)?);
    }
    Ok(Outcome::Ok)
}

fn validate(args: ValidateArgs) -> Result<Outcome> {
    for path in &args.benchmarks {
        let b = load(path)?;
        println!(
            "{}: ok ({} inputs, {} specs, {} static params, {} steps)",
            path.display(),
            b.inputs.len(),
            b.specs.len(),
            b.static_params.len(),
            b.steps()
        );
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Monitor(a) => monitor(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::NotFalsified) => {
            eprintln!("no counterexample found");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
