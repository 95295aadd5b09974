//! `sve`: simulate 2×2 spatially-varying-exposure captures, rank exposure
//! patterns for a scene, reconstruct HDR radiance and evaluate rankings.

mod commands;
mod error;
mod io;
mod manifest;

use std::io::IsTerminal;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracing::error;
use tracing_subscriber::filter::LevelFilter;

use crate::error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "sve", version, about = "Exposure-pattern selection for 2x2 SVE sensors")]
struct Cli {
    /// Worker threads for pattern-level parallelism (default: all cores).
    /// Outputs do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "info")]
    log_level: LevelFilter,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic radiance map.
    Synth(commands::synth::SynthArgs),
    /// Simulate a raw capture of a scene through one pattern.
    Capture(commands::capture::CaptureArgs),
    /// Capture a low-resolution pilot and write its radiance histogram.
    Pilot(commands::pilot::PilotArgs),
    /// Rank every pattern class with one risk estimator.
    Rank(commands::rank::RankArgs),
    /// Reconstruct radiance from a raw capture.
    Reconstruct(commands::reconstruct::ReconstructArgs),
    /// Score every pattern class on a set of scenes and grade the estimators.
    Eval(commands::eval::EvalArgs),
    /// Time risk evaluation of every pattern class at several resolutions.
    Bench(commands::bench::BenchArgs),
    /// Pilot, rank, capture with the top pattern, reconstruct and score.
    Pipeline(commands::pipeline::PipelineArgs),
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Precondition("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    match &cli.command {
        Command::Synth(a) => commands::synth::run(a),
        Command::Capture(a) => commands::capture::run(a),
        Command::Pilot(a) => commands::pilot::run(a),
        Command::Rank(a) => commands::rank::run(a),
        Command::Reconstruct(a) => commands::reconstruct::run(a),
        Command::Eval(a) => commands::eval::run(a),
        Command::Bench(a) => commands::bench::run(a),
        Command::Pipeline(a) => commands::pipeline::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Help and version exit 0; usage errors exit with `exit::PARSE`.
        Err(e) => e.exit(),
    };
    tracing_subscriber::fmt()
        .with_max_level(cli.log_level)
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .with_target(false)
        .init();

    match run(&cli) {
        Ok(()) => ExitCode::from(exit::SUCCESS),
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
