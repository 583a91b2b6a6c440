//! `lyaplab`: Lyapunov exponents of random matrix products from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::{
    concentration::ConcentrationArgs, constants::ConstantsArgs, estimate::EstimateArgs, example9::Example9Args,
    ids::IdsArgs, ldp::LdpArgs, markov::MarkovArgs, wasserstein::WassersteinArgs,
};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "lyaplab", version, about = "Lyapunov exponents of random matrix products")]
struct Cli {
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Master seed; falls back to LYAPLAB_SEED, then 1.
    #[arg(long, global = true, env = "LYAPLAB_SEED")]
    seed: Option<u64>,

    /// Rescale measure-file weights that do not sum to 1.
    #[arg(long, global = true)]
    renormalize: bool,

    /// Write outputs into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(untagged)]
enum Command {
    /// Top, bottom and partial-sum exponents of a measure file.
    Estimate(EstimateArgs),
    /// Closed-form regularity constants.
    Constants(ConstantsArgs),
    /// Empirical pressure and rate function.
    Ldp(LdpArgs),
    /// Tail frequency of finite-time averages against the concentration bounds.
    Concentration(ConcentrationArgs),
    /// Exponents of a Markov-driven cocycle.
    Markov(MarkovArgs),
    /// Integrated density of states and Lyapunov curve of an Anderson model.
    Ids(IdsArgs),
    /// The two-matrix family a = 2, ψ = π/3, p = 1/2 end to end.
    Example9(Example9Args),
    /// Distances between two measure files.
    Wasserstein(WassersteinArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Estimate(_) => "estimate",
            Command::Constants(_) => "constants",
            Command::Ldp(_) => "ldp",
            Command::Concentration(_) => "concentration",
            Command::Markov(_) => "markov",
            Command::Ids(_) => "ids",
            Command::Example9(_) => "example9",
            Command::Wasserstein(_) => "wasserstein",
        }
    }
}

/// Exit 2 for bad input, 3 for numerical breakdown.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
}

impl From<lyaplab::Error> for Failure {
    fn from(e: lyaplab::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

/// Options every command sees.
pub struct Globals {
    pub seed: u64,
    pub renormalize: bool,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let start = Instant::now();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| Failure::Numerical(e.to_string()))?;
    }
    let g = Globals { seed: cli.seed.unwrap_or(DEFAULT_SEED), renormalize: cli.renormalize };
    let mut flags = serde_json::to_value(&cli.command).expect("flags serialize");
    if let Some(map) = flags.as_object_mut() {
        map.insert("renormalize".into(), g.renormalize.into());
    }
    let manifest = output::Manifest::new(cli.command.name(), flags, g.seed);
    let outputs = match &cli.command {
        Command::Estimate(a) => commands::estimate::run(a, &g)?,
        Command::Constants(a) => commands::constants::run(a, &g)?,
        Command::Ldp(a) => commands::ldp::run(a, &g)?,
        Command::Concentration(a) => commands::concentration::run(a, &g)?,
        Command::Markov(a) => commands::markov::run(a, &g)?,
        Command::Ids(a) => commands::ids::run(a, &g)?,
        Command::Example9(a) => commands::example9::run(a, &g)?,
        Command::Wasserstein(a) => commands::wasserstein::run(a, &g)?,
    };
    output::emit(manifest, &outputs, cli.out.as_deref(), start.elapsed())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
