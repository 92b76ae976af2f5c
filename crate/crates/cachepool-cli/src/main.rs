//! `cachepool`: scenario-driven LRU cache simulation and prediction.
//!
//! ```text
//! cachepool simulate|predict|plan|compare --scenario FILE --out DIR
//!           [--methods m1,m2] [--seeds s1,s2] [--no-warmup]
//! ```
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure or
//! partial output. `CACHEPOOL_THREADS` caps worker parallelism.

mod commands;
mod output;
mod scenario;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn config(msg: String) -> Self {
        CliError::Config(msg)
    }

    fn runtime(msg: String) -> Self {
        CliError::Runtime(msg)
    }
}

impl From<cachepool_core::Error> for CliError {
    fn from(e: cachepool_core::Error) -> Self {
        use cachepool_core::Error as E;
        match e {
            E::InvalidSpec(_) | E::UnsupportedConfig(_) | E::Domain(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "cachepool", version, about = "LRU pooling/separation studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for CSV/report files.
    #[arg(long)]
    out: PathBuf,
    /// Override the scenario's prediction methods (che,asymptotic,closed).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Override the scenario's seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Disable warmup (count from the first request).
    #[arg(long)]
    no_warmup: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulator and write empirical miss ratios.
    Simulate(CommonArgs),
    /// Write analytic miss-ratio predictions.
    Predict(CommonArgs),
    /// Report the pooling-versus-separation plan.
    Plan(CommonArgs),
    /// Simulate, predict and join with relative errors.
    Compare(CommonArgs),
}

fn configure_threads() {
    if let Ok(v) = std::env::var("CACHEPOOL_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        } else {
            eprintln!("ignoring CACHEPOOL_THREADS={v:?} (not a number)");
        }
    }
}

fn dispatch(cmd: &Command) -> Result<(), CliError> {
    let (args, runner): (&CommonArgs, fn(&scenario::Scenario, &std::path::Path) -> Result<(), CliError>) =
        match cmd {
            Command::Simulate(a) => (a, commands::cmd_simulate),
            Command::Predict(a) => (a, commands::cmd_predict),
            Command::Plan(a) => (a, commands::cmd_plan),
            Command::Compare(a) => (a, commands::cmd_compare),
        };
    let file = scenario::load(&args.scenario)?;
    let scenario = scenario::validate(
        file,
        args.seeds.clone(),
        args.methods.clone(),
        args.no_warmup,
    )?;
    runner(&scenario, &args.out)
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            ExitCode::from(3)
        }
    }
}
