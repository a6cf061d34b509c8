//! Command-line driver for the solver: configuration, run orchestration,
//! persistence and reports.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod initial;
pub mod output;
pub mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use es_core::exec::Backend;

pub use config::{parse_config, parse_config_as, Mode, RunConfig};
pub use error::{CliError, CliResult};
pub use run::{execute, load, Overrides, Summary};

#[derive(Debug, Parser)]
#[command(name = "esim", version, about = "Euler-Schrodinger decay simulations and estimate checks")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for random initial data and lemma ensembles.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Abort when the regularity gate fails instead of flagging it.
    #[arg(long, global = true)]
    pub strict_gate: bool,
    /// Evaluate on one thread even when the parallel backend is built.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum Command {
    Simulate,
    VerifyBurgers,
    VerifyLemmas,
    Sweep,
    Report,
}

impl From<Command> for Mode {
    fn from(c: Command) -> Mode {
        match c {
            Command::Simulate => Mode::Simulate,
            Command::VerifyBurgers => Mode::VerifyBurgers,
            Command::VerifyLemmas => Mode::VerifyLemmas,
            Command::Sweep => Mode::Sweep,
            Command::Report => Mode::Report,
        }
    }
}

pub const DEFAULT_OUT: &str = "esim-out";

/// Parse the configuration named on the command line and run it.
pub fn run_cli(cli: &Cli) -> CliResult<Summary> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(CliError::io(p))?,
        None => String::new(),
    };
    let ov = Overrides {
        mode: cli.command.map(Mode::from),
        out: cli.out.clone(),
        seed: cli.seed,
        strict_gate: cli.strict_gate,
    };
    let cfg = load(&text, &ov)?;
    let out = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let backend = if cli.sequential { Backend::Sequential } else { Backend::default() };
    execute(&cfg, &out, backend)
}

/// Entry point shared by the binary and the tests; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { error::EXIT_CONFIG } else { error::EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(&cli) {
        Ok(s) => {
            println!("{:?}: wrote {} files to {}", s.mode, s.files.len(), s.out_dir.display());
            error::EXIT_OK
        }
        Err(e) => {
            eprintln!("esim: {e}");
            e.exit_code()
        }
    }
}
