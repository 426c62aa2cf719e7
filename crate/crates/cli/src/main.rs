use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;

#[derive(Parser)]
#[command(name = "spinxfer", version, about = "Subspace transfer control of random-coupling Ising rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every model-building command. Each overrides the
/// corresponding key of the `--config` file.
#[derive(Args, Clone, Debug, Default)]
pub struct Common {
    /// TOML experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub spins: Option<usize>,
    /// Master seed for the coupling draws.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Final time(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub tf: Vec<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub breaker: Option<BreakerArg>,
    /// Output directory (default: runs/<command>-<unix time>-<config hash>).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BreakerArg {
    /// β σ_1^z
    Single,
    /// β Σ σ_i^z
    Sum,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PulseArg {
    Zero,
    /// params: a, omega
    Gaussian,
    /// params: lambda_1 … lambda_n
    Polynomial,
    /// params: piecewise-constant bin amplitudes
    Bins,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    /// Two-node polynomial.
    Polynomial,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonalize the static Hamiltonian of one trial and report degeneracies.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// 1-based trial index within the draw.
        #[arg(long, default_value_t = 1)]
        trial: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Propagate one pulse and print F and F_S.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        trial: usize,
        #[arg(long, value_enum, default_value = "zero")]
        pulse: PulseArg,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        params: Vec<f64>,
        /// Points in the written pulse-shape CSV.
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// Also write F(t) at this many evenly spaced times.
        #[arg(long)]
        trajectory: Option<usize>,
    },
    /// Map the fidelity landscape of a two-parameter family.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        trial: usize,
        #[arg(long, value_enum, default_value = "gaussian")]
        family: FamilyArg,
        /// Grid points per axis.
        #[arg(long, default_value_t = 101)]
        resolution: usize,
    },
    /// Run every configured scheme on one trial and export the pulses.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        trial: usize,
    },
    /// Run the full trial × t_f × scheme campaign (resumable).
    Campaign {
        #[command(flatten)]
        common: Common,
        /// Record per-cell wall time (makes the CSV run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Fidelity differences against a reference scheme.
    Compare {
        /// campaign.csv, or a campaign directory containing one.
        input: PathBuf,
        #[arg(long, default_value = "dcrab100")]
        reference: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Spectrum { common, trial, tol } => commands::spectrum(&common, trial, tol),
        Command::Evolve { common, trial, pulse, params, samples, trajectory } => {
            commands::evolve(&common, trial, pulse, &params, samples, trajectory)
        }
        Command::Sweep { common, trial, family, resolution } => commands::sweep(&common, trial, family, resolution),
        Command::Optimize { common, trial } => commands::optimize(&common, trial),
        Command::Campaign { common, timing } => commands::campaign(&common, timing),
        Command::Compare { input, reference, out } => commands::compare(&input, &reference, out),
    };
    match result {
        Ok(commands::Status::Complete) => ExitCode::SUCCESS,
        Ok(commands::Status::Partial(n)) => {
            eprintln!("warning: {n} cell(s) failed; see the error column");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
