//! `qmomentum`: command-line front end for the momentum-statistics library.
//!
//! Exit codes: 0 on success, 1 for a runtime failure, 2 for a configuration
//! or usage error. Every failure prints one line to stderr starting with
//! `error[config]:`, `error[runtime]:` or `error[usage]:`.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use commands::CommandError;
use config::{Format, Overrides, RunConfig, UnitPreset};

#[derive(Parser)]
#[command(name = "qmomentum", version, about = "Total-momentum statistics of quantum gases in a periodic box")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Relative tolerance of truncated sums (`tolerances.rel`).
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Energy cutoff of spectral tables (`e_max`).
    #[arg(long, global = true, value_name = "X")]
    emax: Option<f64>,
    #[arg(long, global = true, value_enum)]
    units: Option<UnitPreset>,
}

#[derive(Subcommand, Clone, Copy, Debug)]
enum Command {
    /// Momentum distribution ν_Q and its cumulative curve Γ(κ).
    Dist,
    /// Z/Z_irred against its lower and upper bounds over the side grid.
    Bounds,
    /// Distance of the scaled 1D momentum CDF from its Gaussian limit.
    Clt,
    /// Center-of-mass kernel samples and a positivity check.
    Com,
    /// Limit report of an example measure family.
    Measure,
    /// Critical velocity of the dissipative heating model.
    Twofluid,
    /// Boost set equality and Landau excitability.
    Landau,
    /// Fixed deterministic self-test.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Dist => "dist",
            Command::Bounds => "bounds",
            Command::Clt => "clt",
            Command::Com => "com",
            Command::Measure => "measure",
            Command::Twofluid => "twofluid",
            Command::Landau => "landau",
            Command::Selftest => "selftest",
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn echo(command: Command, cfg: &RunConfig) -> Value {
    let mut v = serde_json::to_value(cfg).expect("configuration serializes");
    if let Value::Object(map) = &mut v {
        map.insert("command".into(), Value::String(command.name().into()));
    }
    v
}

fn run(cli: Cli) -> Result<(), CommandError> {
    let mut cfg = config::load(cli.config.as_deref())?;
    cfg.apply(&Overrides { format: cli.format, out: cli.out, tol: cli.tol, emax: cli.emax, units: cli.units });
    cfg.validate()?;
    let report = match cli.command {
        Command::Dist => commands::dist(&cfg),
        Command::Bounds => commands::bounds(&cfg),
        Command::Clt => commands::clt(&cfg),
        Command::Com => commands::com(&cfg),
        Command::Measure => commands::measure(&cfg),
        Command::Twofluid => commands::twofluid(&cfg),
        Command::Landau => commands::landau(&cfg),
        Command::Selftest => commands::selftest(),
    }?;
    let text = report.render(cfg.format(), &echo(cli.command, &cfg));
    match &cfg.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CommandError::Runtime(format!("io: cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // help and version requests
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[usage]: {}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CommandError::Config(e)) => {
            eprintln!("error[config]: {}", one_line(&e.to_string()));
            ExitCode::from(2)
        }
        Err(CommandError::Runtime(msg)) => {
            eprintln!("error[runtime]: {}", one_line(&msg));
            ExitCode::from(1)
        }
    }
}
