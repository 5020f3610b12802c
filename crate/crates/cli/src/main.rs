//! `hierlab` command-line front end.

mod commands;
mod config;
mod error;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hierlab::Kappa;

use crate::commands::Context;
use crate::config::{Pairs, RunConfig, StateSource};
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;

#[derive(Debug, Parser)]
#[command(name = "hierlab", version, about = "Checks on the cubic NLS hierarchy and its GP counterpart")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for CSV/JSON/SVG artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Also write SVG plots.
    #[arg(long, global = true)]
    plot: bool,

    #[arg(long, global = true)]
    n_max: Option<usize>,

    /// Initial state file (`{"grid":{"N","L"},"re":[..],"im":[..]}`).
    #[arg(long, global = true)]
    state: Option<PathBuf>,

    /// Sign of the nonlinearity, 1 or -1.
    #[arg(long, global = true, allow_hyphen_values = true)]
    kappa: Option<i32>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Table of I_1..I_{n_max} at the initial state.
    Invariants,
    /// Finite-difference check of the symplectic gradients.
    Gradcheck {
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Pairwise brackets of the conserved functionals.
    Involution {
        /// `all` or a list like `1:3,2:5`.
        #[arg(long)]
        pairs: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Integrates a flow and reports the drift of I_1..I_{n_max}.
    Evolve,
    /// Transition-matrix identities, trace conservation, zero curvature,
    /// quasi-momentum asymptotics and the r-matrix bracket.
    Lax,
    /// Finite-particle GP checks on factorized and mixed states.
    GpCheck,
    /// Symmetric rank-one decomposition of a symmetric tensor.
    Rank1,
    /// Writes the graded recursion tables as JSON.
    DumpTables,
}

fn build_context(cli: &Cli) -> CliResult<Context> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.n_max {
        cfg.n_max = n;
    }
    if let Some(path) = &cli.state {
        cfg.state = StateSource::File(path.clone());
    }
    if let Some(k) = cli.kappa {
        cfg.kappa = Kappa::try_from(k).map_err(|e| CliError::Config(e.to_string()))?;
    }
    match &cli.command {
        Command::Gradcheck { trials: Some(t) } => cfg.gradcheck.trials = *t,
        Command::Involution { pairs, trials } => {
            if let Some(p) = pairs {
                cfg.involution.pairs = Pairs::parse(p)?;
            }
            if let Some(t) = trials {
                cfg.involution.trials = *t;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    let out = OutputDir::create(&cli.out)?;
    Ok(Context { cfg, out, plot: cli.plot })
}

fn run(cli: &Cli) -> CliResult<()> {
    let ctx = build_context(cli)?;
    match cli.command {
        Command::Invariants => commands::invariants(&ctx),
        Command::Gradcheck { .. } => commands::gradcheck(&ctx),
        Command::Involution { .. } => commands::involution(&ctx),
        Command::Evolve => commands::evolve(&ctx),
        Command::Lax => commands::lax(&ctx),
        Command::GpCheck => commands::gp_check(&ctx),
        Command::Rank1 => commands::rank1(&ctx),
        Command::DumpTables => commands::dump_tables(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
