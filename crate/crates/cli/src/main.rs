//! `charmat`: batch front end for Weyl functions, characteristic matrices,
//! resolvents, eigenvalue scans and the verification suite.

mod commands;
mod config;
mod error;
mod output;
mod problem;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::commands::Command;
use crate::config::ProblemConfig;
use crate::error::CliError;
use crate::output::OutDir;
use crate::problem::{Overrides, Problem};

#[derive(Debug, Parser)]
#[command(name = "charmat", version, about = "Characteristic matrices and generalized resolvents of symmetric systems")]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// JSON problem description.
    #[arg(long)]
    config: PathBuf,

    /// Output directory; defaults to the config's `out` or `.`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for λ-sweeps.
    #[arg(long)]
    workers: Option<usize>,

    /// Seed for random boundary parameters and forcing terms.
    #[arg(long)]
    seed: Option<u64>,

    /// Tolerance override, repeatable.
    #[arg(long = "tol-override", value_name = "KEY=VAL", value_parser = parse_override)]
    tol_override: Vec<(String, f64)>,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VAL, got {s}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{k}: {e}"))?;
    if !(v.is_finite() && v > 0.0) {
        return Err(format!("{k}: tolerance must be positive"));
    }
    Ok((k.trim().to_string(), v))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.workers == Some(0) {
        return Err(CliError::Schema("--workers must be positive".into()));
    }
    let config = ProblemConfig::load(&cli.config)?;
    let out = cli.out.clone().or_else(|| config.out.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    let overrides = Overrides { seed: cli.seed, workers: cli.workers, tolerances: cli.tol_override.clone() };
    let problem = Problem::build(config, &overrides)?;
    let mut dir = OutDir::create(&out)?;
    let result = commands::run(cli.command, &problem, &mut dir);
    for path in dir.written() {
        println!("{}", path.display());
    }
    result
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("charmat: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
