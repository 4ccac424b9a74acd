use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use tidal_cli::commands::{cmd_base, cmd_perturb, cmd_scan, cmd_solve, cmd_verify, CliError};
use tidal_cli::config::{Config, KEYS_HELP};

#[derive(Parser)]
#[command(name = "tidal", version, about = "Rotating fluid equilibria perturbed by a point mass", after_help = KEYS_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Io {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Unperturbed state: base.json and phi0.csv.
    #[command(after_help = KEYS_HELP)]
    Base(Io),
    /// Fourier multipliers and non-resonance scan: modes.csv and scan.json.
    #[command(after_help = KEYS_HELP)]
    Scan(Io),
    /// First-order response for each mass: perturb_K.json and boundary_K.csv.
    #[command(after_help = KEYS_HELP)]
    Perturb(Io),
    /// Nonlinear solve for each mass: solve_K.json, boundary_K.csv, history_K.csv.
    #[command(after_help = KEYS_HELP)]
    Solve(Io),
    /// Acceptance checks: verify.json.
    #[command(after_help = KEYS_HELP)]
    Verify(Io),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let io = match &cli.command {
        Command::Base(io) | Command::Scan(io) | Command::Perturb(io) | Command::Solve(io) | Command::Verify(io) => io,
    };
    let cfg = Config::load(&io.config).map_err(CliError::Config)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::create_dir_all(&io.out).map_err(|e| CliError::Core(e.into()))?;
    let files = match cli.command {
        Command::Base(_) => cmd_base(&cfg, &io.out)?,
        Command::Scan(_) => cmd_scan(&cfg, &io.out)?,
        Command::Perturb(_) => cmd_perturb(&cfg, &io.out)?,
        Command::Solve(_) => cmd_solve(&cfg, &io.out)?,
        Command::Verify(_) => {
            let (report, path) = cmd_verify(&cfg, &io.out)?;
            for c in &report.criteria {
                println!("{}", c.line());
            }
            let failed = report.criteria.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::VerifyFailed(failed));
            }
            vec![path]
        }
    };
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tidal: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
