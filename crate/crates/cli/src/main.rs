//! `sqzsim` command-line front end.

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Context;
use crate::config::{ExperimentConfig, Format};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "sqzsim", version, about = "Waveguide-OPA squeezed-light simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML experiment configuration. Built-in defaults when absent.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override a configuration value, e.g. `--set opa.loss=0.05`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Root seed; replaces `seed` in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Stdout format. Files are always CSV for tables and JSON for records.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Squeezing and anti-squeezing at the configured operating point.
    Eval {
        /// Pump powers to evaluate instead of `opa.pump_mw`.
        #[arg(long = "pump-mw", value_delimiter = ',')]
        pump_mw: Vec<f64>,
    },
    /// Itemised optical loss budget.
    Budget,
    /// Fit (alpha, L, theta) to a pump-sweep CSV.
    Fit {
        /// CSV with columns pump_mW, squeezing_dB, anti_dB[, sigma_dB].
        #[arg(long)]
        data: PathBuf,
    },
    /// Closed-loop phase-lock simulation.
    LockSim,
    /// Conventional tap ratios against the detection-OPA lock.
    TapSweep,
    /// Raw homodyne time series.
    Synth,
    /// Zero-span analyzer trace.
    ZeroSpan,
    /// Swept analyzer spectrum.
    Sweep,
    /// Full headline chain into a timestamped run directory.
    Reproduce,
}

fn run(cli: Cli) -> CliResult<String> {
    let c = cli.common;
    let cfg = ExperimentConfig::load(c.config.as_deref(), &c.overrides)?.with_root_seed(c.seed);
    let format = c.format.unwrap_or(cfg.output.format);
    let ctx = Context {
        out_dir: c.out_dir.or_else(|| cfg.output.dir.clone()),
        cfg,
    };
    let report = match cli.command {
        Command::Eval { pump_mw } => commands::eval(&ctx, &pump_mw)?,
        Command::Budget => commands::budget(&ctx)?,
        Command::Fit { data } => commands::fit(&ctx, &data)?,
        Command::LockSim => commands::lock_sim(&ctx)?,
        Command::TapSweep => commands::tap_sweep(&ctx)?,
        Command::Synth => commands::synth(&ctx)?,
        Command::ZeroSpan => commands::zero_span(&ctx)?,
        Command::Sweep => commands::sweep(&ctx)?,
        Command::Reproduce => commands::reproduce(&ctx)?,
    };
    report.render(format)
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(CliError::Usage(e.to_string().trim_end().to_string())),
    };
    match run(cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}
