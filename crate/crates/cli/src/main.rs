use std::path::PathBuf;
use std::process::ExitCode;

use bie_cli::{compare_command, mie_command, resolve_workers, run_command, CliError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bie",
    version,
    about = "Two-current boundary integral solver for scattering by a homogeneous body"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem (or sweep) and write artifacts.
    Run {
        config: PathBuf,
        /// Worker threads; falls back to BIE_WORKERS, then all cores.
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory, overriding the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare run artifacts with oracle artifacts.
    Compare {
        run_dir: PathBuf,
        oracle_dir: PathBuf,
    },
    /// Write Mie-series oracle artifacts for a sphere config.
    Mie {
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run {
            config,
            workers,
            output,
        } => {
            let workers = resolve_workers(workers)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| CliError::Config {
                    field: "workers".into(),
                    message: e.to_string(),
                })?;
            pool.install(|| run_command(&config, output.as_deref(), workers))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            run_dir,
            oracle_dir,
        } => {
            let c = compare_command(&run_dir, &oracle_dir)?;
            let value = bie_cli::output::fix_floats(serde_json::to_value(&c).unwrap_or_default());
            println!(
                "{}",
                serde_json::to_string_pretty(&value).unwrap_or_default()
            );
            Ok(if c.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Mie { config, output } => {
            mie_command(&config, output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config {
                field: "arguments".into(),
                message: e.kind().to_string(),
            };
            let _ = e.print();
            eprintln!("{}", err.to_json());
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
