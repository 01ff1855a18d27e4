//! `gpsup`: config-driven experiments on suprema of stationary Gaussian
//! processes over random horizons. Every subcommand writes CSV tables to the
//! output directory; `report` adds a markdown summary.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;

use commands::Run;
use config::Config;
use error::CliError;

#[derive(Parser)]
#[command(name = "gpsup", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Screen the covariance model against the local-shape, decorrelation and log-decay conditions.
    CheckModel(RunArgs),
    /// Estimate the Pickands constant and update the cache.
    Pickands(RunArgs),
    /// Tabulate the asymptotic tail over `u_values`.
    Asymptotics(RunArgs),
    /// Monte Carlo estimate of the supremum tail over `u_values`.
    Simulate(RunArgs),
    /// Non-exceedance over `x m(u)` against `exp(-x)`.
    Lemma43(RunArgs),
    /// Monte Carlo against asymptotics, with a markdown summary.
    Report(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config `out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cmd: Command) -> Result<String, CliError> {
    let (args, f): (RunArgs, fn(&Run) -> Result<String, CliError>) = match cmd {
        Command::CheckModel(a) => (a, commands::check_model),
        Command::Pickands(a) => (a, commands::pickands),
        Command::Asymptotics(a) => (a, commands::asymptotics),
        Command::Simulate(a) => (a, commands::simulate),
        Command::Lemma43(a) => (a, commands::lemma43),
        Command::Report(a) => (a, commands::report),
    };
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Field {
                path: "--threads".into(),
                reason: "must be at least 1".into(),
            });
        }
        // only fails if a global pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = Config::load(&args.config)?;
    let run = Run {
        seed: args.seed.unwrap_or(cfg.raw.seed),
        out_dir: cfg.out_dir(args.out.as_deref()),
        config_path: args.config,
        cfg,
    };
    let msg = f(&run)?;
    Ok(format!("{msg}\noutputs in {}", run.out_dir.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
