use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use facade_inspect_cli::{cmd_inspect, cmd_mission, cmd_plan, report::cmd_report, resolve, CliError, RunOptions};

/// UAV facade inspection simulator.
#[derive(Parser)]
#[command(name = "facade-inspect", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fly the perimeter only; writes plan, trajectory and capture CSVs.
    Inspect(RunArgs),
    /// Inspection plus detection flights; also writes report.json.
    Mission(RunArgs),
    /// Summarize a run directory.
    Report {
        /// Directory written by `inspect` or `mission`.
        dir: PathBuf,
    },
    /// Export the perimeter waypoints only.
    Plan(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario TOML; the built-in default scene when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override any config field, e.g. `--set mission.pid.kp=1.2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl From<RunArgs> for RunOptions {
    fn from(a: RunArgs) -> Self {
        RunOptions { config: a.config, seed: a.seed, out: a.out, set: a.set }
    }
}

fn dispatch(command: Command) -> Result<String, CliError> {
    match command {
        Command::Inspect(a) => cmd_inspect(&resolve(&a.into())?),
        Command::Mission(a) => cmd_mission(&resolve(&a.into())?),
        Command::Plan(a) => cmd_plan(&resolve(&a.into())?),
        Command::Report { dir } => cmd_report(&dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(text) => {
            // a closed pipe (`| head`) is not an error worth reporting
            let _ = writeln!(std::io::stdout(), "{}", text.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("facade-inspect: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
