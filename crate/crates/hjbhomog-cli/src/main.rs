//! `hjbhomog <command> --config <path> [--out <dir>]`
//!
//! Exit codes: 0 success, 1 validation or parse failure, 2 numerical
//! failure, 3 property violation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hjbhomog_cli::{commands, config};

#[derive(Parser)]
#[command(
    name = "hjbhomog",
    version,
    about = "Two-domain periodic homogenization laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to a line-based `key = value` config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the effective Hamiltonian over the momentum grid.
    Effective(RunArgs),
    /// Solve one cell problem: ergodic constant, corrector, diagnostics.
    Cell(RunArgs),
    /// Independent ergodic estimates (finite horizon and crossing).
    Horizon(RunArgs),
    /// Integrate a named control signal in the rescaled problem.
    Trajectory(RunArgs),
    /// Solve the rescaled problems and the homogenized limit equation.
    Homogenize(RunArgs),
    /// Vanishing-eps convergence experiment.
    Converge(RunArgs),
    /// Run the full acceptance suite and report every check.
    Verify(RunArgs),
}

fn load(args: &RunArgs) -> Result<(config::RunConfig, PathBuf), String> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read {}: {e}", args.config.display()))?;
    let cfg = config::parse_config(&text).map_err(|e| e.to_string())?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    Ok((cfg, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Effective(a)
        | Command::Cell(a)
        | Command::Horizon(a)
        | Command::Trajectory(a)
        | Command::Homogenize(a)
        | Command::Converge(a)
        | Command::Verify(a) => a,
    };
    let (cfg, out) = match load(args) {
        Ok(ok) => ok,
        Err(msg) => {
            eprintln!("error kind=validation: {msg}");
            return ExitCode::from(1);
        }
    };
    let result = match &cli.command {
        Command::Effective(_) => commands::effective(&cfg, &out),
        Command::Cell(_) => commands::cell(&cfg, &out),
        Command::Horizon(_) => commands::horizon(&cfg, &out),
        Command::Trajectory(_) => commands::trajectory(&cfg, &out),
        Command::Homogenize(_) => commands::homogenize(&cfg, &out),
        Command::Converge(_) => commands::converge(&cfg, &out),
        Command::Verify(_) => {
            return match commands::verify(&out) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => {
                    eprintln!("error kind=property: acceptance checks failed");
                    ExitCode::from(3)
                }
                Err(e) if e.is_numerical() => {
                    eprintln!("error kind=numerical: {e}");
                    ExitCode::from(2)
                }
                Err(e) => {
                    eprintln!("error kind=validation: {e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_numerical() => {
            eprintln!("error kind=numerical: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error kind=validation: {e}");
            ExitCode::from(1)
        }
    }
}
