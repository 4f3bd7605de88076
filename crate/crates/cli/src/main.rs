//! `snnsim`: command-line front end for the dual-mode neuron simulator.
//!
//! Exit status: 0 on success, 1 when the input is invalid (bad flags, bad
//! config, failed validation, infeasible calibration), 2 on I/O failure.
//! Every failure prints exactly one line to stderr:
//! `snnsim: error kind=<validation|io> command=<name> msg=<text>`.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "snnsim", version, about = "Dual-mode LIF neuron / resistive STDP synapse simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample one spike and a spike pair; report the over-threshold window.
    Waveform(Common),
    /// Closed-form STDP curve plus engine cross-checks at the probe offsets.
    Stdp(Common),
    /// Simulate an arbitrary network under a stimulus schedule.
    Run(RunArgs),
    /// Three-neuron associative learning experiment.
    Pavlov(Common),
    /// Load energy per spike per synapse (JSON on stdout).
    Energy(Common),
    /// Search for a spike shape meeting the window targets (JSON on stdout).
    Calibrate(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON config, or a manifest.json from an earlier run.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one config value, e.g. `--set shape.v_a_plus=0.28`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory. Required by commands that write files; optional
    /// for energy and calibrate.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Shorthand for `--set sim.dt=SECONDS`.
    #[arg(long, value_name = "SECONDS")]
    pub dt: Option<f64>,
    /// Shorthand for `--set sim.trace_decimation=N`.
    #[arg(long, value_name = "N")]
    pub decimate: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    /// Network JSON (replaces the config's `network` section).
    #[arg(long, value_name = "PATH")]
    pub network: Option<PathBuf>,
    /// Stimulus JSON (replaces the config's `stimulus` section).
    #[arg(long, value_name = "PATH")]
    pub stimulus: Option<PathBuf>,
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Io(String),
}

impl Failure {
    fn parts(&self) -> (&'static str, &str, u8) {
        match self {
            Failure::Validation(m) => ("validation", m, 1),
            Failure::Io(m) => ("io", m, 2),
        }
    }
}

impl From<snn_core::Error> for Failure {
    fn from(e: snn_core::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn report(command: &str, failure: &Failure) -> ExitCode {
    let (kind, msg, code) = failure.parts();
    let msg = msg.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("snnsim: error kind={kind} command={command} msg={msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or_default();
            let first = first.strip_prefix("error: ").unwrap_or(first);
            return report("-", &Failure::Validation(first.to_string()));
        }
    };
    let (name, result) = match &cli.command {
        Command::Waveform(c) => ("waveform", commands::waveform(c)),
        Command::Stdp(c) => ("stdp", commands::stdp(c)),
        Command::Run(r) => ("run", commands::run(r)),
        Command::Pavlov(c) => ("pavlov", commands::pavlov(c)),
        Command::Energy(c) => ("energy", commands::energy(c)),
        Command::Calibrate(c) => ("calibrate", commands::calibrate(c)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(name, &f),
    }
}
