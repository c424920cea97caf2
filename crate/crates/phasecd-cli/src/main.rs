//! Benchmark CLI: runs Monte-Carlo recovery, sparse-recovery, equalization,
//! and curve experiments, writing per-trial trace CSVs and a summary JSON.
//!
//! Exit codes: 0 on success, 2 on configuration validation failure, 1 on any
//! other error. Failures print a machine-readable JSON object to stderr.

use clap::{Args, Parser, Subcommand, ValueEnum};
use phasecd::experiment::{
    run_experiment, ExperimentKind, ExperimentSpec, ExperimentSummary, SolverSpec,
};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "phasecd", version, about = "Coordinate-descent phase retrieval benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dense-signal recovery: success rate and error per solver.
    Recover(RunArgs),
    /// Sparse-signal recovery with the l1-regularized solvers.
    Sparse(RunArgs),
    /// Blind equalization on an FIR test channel.
    Equalize(RunArgs),
    /// Success probability vs. M/N, or mean error vs. SNR.
    Curve(CurveArgs),
    /// Print the default configuration for a subcommand as TOML.
    PrintDefaults {
        #[arg(value_enum, default_value_t = KindArg::Recover)]
        kind: KindArg,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed for the whole experiment.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for trace CSVs and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of Monte-Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated solvers: ccd,rcd,gcd,wf,wfls,l1-ccd,l1-rcd.
    #[arg(long)]
    solver: Option<String>,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, default_value_t = Metric::Success)]
    metric: Metric,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    /// Success probability vs. oversampling ratio M/N.
    Success,
    /// Mean relative error vs. SNR in dB.
    Nmse,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Recover,
    Sparse,
    Equalize,
    SuccessCurve,
    NmseCurve,
}

impl KindArg {
    fn defaults(self) -> ExperimentSpec {
        match self {
            KindArg::Recover => ExperimentSpec::recover_defaults(),
            KindArg::Sparse => ExperimentSpec::sparse_defaults(),
            KindArg::Equalize => ExperimentSpec::equalize_defaults(),
            KindArg::SuccessCurve => ExperimentSpec::curve_defaults(),
            KindArg::NmseCurve => ExperimentSpec {
                kind: ExperimentKind::NmseCurve,
                generation: phasecd::measurement::GenConfig {
                    n: 64,
                    m: 384,
                    k: None,
                    snr_db: None,
                    seed: 0,
                },
                ..ExperimentSpec::curve_defaults()
            },
        }
    }
}

#[derive(Debug)]
enum CliError {
    /// Configuration rejected; each entry names one violated field.
    Invalid(Vec<String>),
    Other(anyhow::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}

fn load_spec(args: &RunArgs, kind: ExperimentKind, defaults: ExperimentSpec) -> Result<ExperimentSpec, CliError> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str::<ExperimentSpec>(&text)
                .map_err(|e| CliError::Invalid(vec![format!("config: {e}")]))?
        }
        None => defaults,
    };
    spec.kind = kind;
    if let Some(seed) = args.seed {
        spec.base_seed = seed;
    }
    if let Some(trials) = args.trials {
        spec.trials = trials;
    }
    if let Some(list) = &args.solver {
        spec.solvers =
            SolverSpec::parse_list(list).map_err(|e| CliError::Invalid(vec![e.to_string()]))?;
    }
    let violations = spec.violations();
    if !violations.is_empty() {
        return Err(CliError::Invalid(violations));
    }
    Ok(spec)
}

fn report(summary: &ExperimentSummary) -> serde_json::Value {
    json!({
        "kind": summary.spec.kind,
        "trials": summary.spec.trials,
        "base_seed": summary.spec.base_seed,
        "aggregates": summary.aggregates,
        "curve": summary.curve,
    })
}

fn execute(args: &RunArgs, kind: ExperimentKind, defaults: ExperimentSpec) -> Result<(), CliError> {
    let spec = load_spec(args, kind, defaults)?;
    let summary = run_experiment(&spec, args.out.as_deref().map(Path::new))
        .map_err(|e| match e {
            phasecd::Error::InvalidConfig(msg) => {
                CliError::Invalid(msg.split("; ").map(String::from).collect())
            }
            other => CliError::Other(other.into()),
        })?;
    println!("{}", serde_json::to_string_pretty(&report(&summary)).expect("serializable report"));
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Recover(args) => execute(
            &args,
            ExperimentKind::Recover,
            ExperimentSpec::recover_defaults(),
        ),
        Command::Sparse(args) => execute(
            &args,
            ExperimentKind::Sparse,
            ExperimentSpec::sparse_defaults(),
        ),
        Command::Equalize(args) => execute(
            &args,
            ExperimentKind::Equalize,
            ExperimentSpec::equalize_defaults(),
        ),
        Command::Curve(args) => {
            let (kind, kind_arg) = match args.metric {
                Metric::Success => (ExperimentKind::SuccessCurve, KindArg::SuccessCurve),
                Metric::Nmse => (ExperimentKind::NmseCurve, KindArg::NmseCurve),
            };
            execute(&args.run, kind, kind_arg.defaults())
        }
        Command::PrintDefaults { kind } => {
            let spec = kind.defaults();
            print!("{}", toml::to_string_pretty(&spec).expect("serializable defaults"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invalid(violations)) => {
            eprintln!(
                "{}",
                json!({ "error": "invalid configuration", "violations": violations })
            );
            ExitCode::from(2)
        }
        Err(CliError::Other(e)) => {
            eprintln!("{}", json!({ "error": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
