//! `dephasim`: Monte Carlo and closed-form dephasing of a qubit coupled to diffusing TLSs.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::SimulateArgs;
use crate::config::CliConfig;
use crate::error::CliResult;

#[derive(Parser)]
#[command(name = "dephasim", version, about = "Qubit dephasing from spectrally diffusing two-level systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (frequencies in MHz, times in us).
    #[arg(long, short)]
    config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Sampling {
    /// Overrides `seed` in [run].
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `runs` in [run].
    #[arg(long)]
    runs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo estimate of D(t); writes a JSON run record and the curve CSV beside it.
    Simulate {
        #[arg(long, short)]
        config: PathBuf,
        /// Run record path; the CSV goes next to it.
        #[arg(long, short, default_value = "run.json")]
        out: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        /// Worker threads (all cores by default).
        #[arg(long, env = "DEPHASIM_THREADS")]
        threads: Option<usize>,
        /// Also write a gnuplot script for the CSV.
        #[arg(long)]
        plot: bool,
    },
    /// Closed-form -2 ln D(t) on the [run] grid (CSV: t_us, neg2lnD, branch_id).
    Analytic {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plot: bool,
    },
    /// Regime classification and crossover diagnostics (JSON).
    Regime {
        #[command(flatten)]
        common: Common,
    },
    /// Effective dephasing rate across temperature (CSV: T_K, gamma_phi, gamma_phi_long in 1/us).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plot: bool,
    },
    /// KS tests of the telegraph bath against the propagator and stationary densities (JSON).
    OracleDiffusion {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Parses a configuration and prints it in canonical form.
    ShowConfig {
        #[command(flatten)]
        common: Common,
    },
    /// Markov-rate amplitudes against the full single-excitation solution (JSON).
    Validate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            sampling,
            threads,
            plot,
        } => {
            let cfg = CliConfig::load(&config)?;
            let args = SimulateArgs {
                seed: sampling.seed,
                runs: sampling.runs,
                threads,
                out,
                plot,
            };
            println!("{}", commands::simulate(&cfg, &args)?);
        }
        Command::Analytic { common, plot } => {
            commands::analytic(&CliConfig::load(&common.config)?, common.out.as_deref(), plot)?;
        }
        Command::Regime { common } => {
            commands::regime(&CliConfig::load(&common.config)?, common.out.as_deref())?;
        }
        Command::Sweep { common, plot } => {
            let summary = commands::sweep(&CliConfig::load(&common.config)?, common.out.as_deref(), plot)?;
            eprintln!("{summary}");
        }
        Command::OracleDiffusion { common, sampling } => {
            let cfg = CliConfig::load(&common.config)?;
            commands::oracle_diffusion(&cfg, sampling.seed, sampling.runs, common.out.as_deref())?;
        }
        Command::ShowConfig { common } => {
            commands::show_config(&CliConfig::load(&common.config)?, common.out.as_deref())?;
        }
        Command::Validate { common, sampling } => {
            let cfg = CliConfig::load(&common.config)?;
            if !commands::validate(&cfg, sampling.seed, sampling.runs, common.out.as_deref())? {
                eprintln!("Markov and full amplitudes differ by more than 1%");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dephasim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
