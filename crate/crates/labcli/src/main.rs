use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use adlab_cli::config::ScenarioConfig;
use adlab_cli::pipeline::{list_models, run_scenario, sweep_scenario};
use adlab_cli::CliError;

/// Quantum evolution scenarios with adiabaticity diagnostics.
#[derive(Parser)]
#[command(name = "adlab", version, about)]
struct Cli {
    /// Write outputs here instead of the config's output_dir.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario: report plus time-series files.
    Run { config: PathBuf },
    /// Rerun the scenario at each sweep total time and tabulate scaling columns.
    Sweep { config: PathBuf },
    /// List available models and their parameter schemas.
    ListModels,
}

fn main() -> ExitCode {
    env_logger::Builder::from_default_env().init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => {
            let scenario = ScenarioConfig::from_path(&config)?;
            let output_dir = resolve_output_dir(&cli.output_dir, &scenario);
            let start = Instant::now();
            let written = run_scenario(&scenario, &config, &output_dir)?;
            report_written(&written, start);
            Ok(())
        }
        Command::Sweep { config } => {
            let scenario = ScenarioConfig::from_path(&config)?;
            let output_dir = resolve_output_dir(&cli.output_dir, &scenario);
            let start = Instant::now();
            let written = sweep_scenario(&scenario, &config, &output_dir)?;
            report_written(&written, start);
            Ok(())
        }
        Command::ListModels => {
            print!("{}", list_models());
            Ok(())
        }
    }
}

fn resolve_output_dir(flag: &Option<PathBuf>, scenario: &ScenarioConfig) -> PathBuf {
    flag.clone()
        .or_else(|| scenario.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn report_written(written: &[adlab_cli::pipeline::WrittenFile], start: Instant) {
    for file in written {
        println!("wrote {} ({})", file.path.display(), file.summary);
    }
    println!("done in {:.3}s", start.elapsed().as_secs_f64());
}
