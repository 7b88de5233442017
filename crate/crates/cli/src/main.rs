use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nnls_cli::commands::{cmd_asym, cmd_compare, cmd_evolve, cmd_scatter, cmd_soliton};
use nnls_cli::config::RunConfig;
use nnls_cli::selfcheck::cmd_selfcheck;
use nnls_cli::{Failure, EXIT_INPUT};

#[derive(Parser)]
#[command(name = "nnls", version, about = "Scattering, long-time asymptotics and evolution for the nonlocal NLS with step-like data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Builtin profile name (pure_step, soliton, smoothed_step) or profile JSON file.
    #[arg(long, global = true)]
    profile: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Direct scattering: spectral CSV, sidecar and validation summary.
    Scatter,
    /// Leading long-time terms on a grid of rays and times.
    Asym,
    /// Time evolution with snapshots.
    Evolve,
    /// PDE against asymptotics along rays.
    Compare,
    /// Exact soliton against the fixed-x long-time formula.
    Soliton,
    /// Invariant suite on builtin profiles.
    Selfcheck,
}

fn run(cli: &Cli) -> Result<i32, Failure> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    }
    .with_profile_arg(cli.profile.as_deref())?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Scatter => cmd_scatter(&cfg, out),
        Command::Asym => cmd_asym(&cfg, out),
        Command::Evolve => cmd_evolve(&cfg, out),
        Command::Compare => cmd_compare(&cfg, out).map(|r| r.0),
        Command::Soliton => cmd_soliton(&cfg, out),
        Command::Selfcheck => cmd_selfcheck(&cfg, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("NNLS_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: NNLS_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(EXIT_INPUT as u8);
            }
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
