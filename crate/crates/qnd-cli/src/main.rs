//! `qnd` — batch front end for the quadrature-measurement simulator.
//!
//! Subcommands: `sweep` (frontier table), `optimize` (best and equal-fidelity
//! operating points), `simulate` (seeded Monte Carlo run), `validate`
//! (consistency suite). Set `QND_LOG=info` for progress on stderr.
//!
//! Exit codes: 0 success, 1 validation failure, 2 config error, 3 numeric
//! error.

mod commands;
mod config;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::OutputFormat;
use config::{ConfigError, Overrides, ScenarioConfig};
use scenario::NumericError;

#[derive(Parser)]
#[command(
    name = "qnd",
    version,
    about = "Tunable QND quadrature measurement simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario config file (flat key = value lines)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write output here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Override simulate.seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override grid.points
    #[arg(long, global = true)]
    grid_points: Option<usize>,

    /// Override grid.x_max
    #[arg(long, global = true)]
    x_max: Option<f64>,

    /// Output format where both are supported
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Frontier table of (x, F, G, F+G, sigma_eff2, N_p) over a trade-off sweep
    Sweep,
    /// Locate the maximum of F+G and the F = G crossing, with realizations
    Optimize,
    /// Draw seeded measurement outcomes with their feedback parameters
    Simulate,
    /// Run the consistency suite and report per-check results
    Validate,
}

enum CliFailure {
    Validation,
    Config(String),
    Numeric(String),
}

impl CliFailure {
    fn exit_code(&self) -> u8 {
        match self {
            CliFailure::Validation => 1,
            CliFailure::Config(_) => 2,
            CliFailure::Numeric(_) => 3,
        }
    }
}

impl From<ConfigError> for CliFailure {
    fn from(e: ConfigError) -> Self {
        CliFailure::Config(e.0)
    }
}

impl From<NumericError> for CliFailure {
    fn from(e: NumericError) -> Self {
        CliFailure::Numeric(e.0)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("QND_LOG")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                CliFailure::Validation => eprintln!("validation failed"),
                CliFailure::Config(msg) => eprintln!("config error: {msg}"),
                CliFailure::Numeric(msg) => eprintln!("numeric error: {msg}"),
            }
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliFailure> {
    let overrides = Overrides {
        seed: cli.seed,
        grid_points: cli.grid_points,
        x_max: cli.x_max,
    };
    let config = ScenarioConfig::load(cli.config.as_deref(), overrides)?;

    let (output, ok) = match cli.command {
        Command::Sweep => (
            commands::sweep(&config, cli.format.unwrap_or(OutputFormat::Csv))?,
            true,
        ),
        Command::Optimize => (
            commands::optimize(&config, cli.format.unwrap_or(OutputFormat::Json))?,
            true,
        ),
        Command::Simulate => (
            commands::simulate(&config, cli.format.unwrap_or(OutputFormat::Json))?,
            true,
        ),
        Command::Validate => commands::validate(&config),
    };

    match &cli.out {
        Some(path) => std::fs::write(path, &output)
            .map_err(|e| CliFailure::Config(format!("cannot write {}: {e}", path.display())))?,
        None => {
            use std::io::Write;
            // tolerate a closed pipe (e.g. `qnd sweep | head`)
            if let Err(e) = std::io::stdout().write_all(output.as_bytes()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(CliFailure::Config(format!("cannot write to stdout: {e}")));
                }
            }
        }
    }

    if ok {
        Ok(())
    } else {
        Err(CliFailure::Validation)
    }
}
