use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rdars_core::{Scheme, SystemConfig};
use rdars_sim::{emit_outputs, load_config_over, run_experiment, to_toml, ExperimentKind, ExperimentSpec, Preset, SimError};

#[derive(Parser)]
#[command(name = "rdars", version, about = "Monte Carlo experiments for RDARS-aided ISAC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write records.csv, summary.json and per-run files.
    Run(RunArgs),
    /// Print the effective configuration as TOML.
    Config {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML file; its keys override the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: ExperimentKind,
    /// Comma-separated scheme names (default depends on the experiment).
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Comma-separated sweep values overriding the default grid.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Also fill the wall_ms column of records.csv (makes it run-dependent).
    #[arg(long)]
    timing_in_records: bool,
}

/// Without a preset, a config file layers over the full-size defaults and a bare run
/// uses the desk preset.
fn base_config(config: Option<&PathBuf>, preset: Option<Preset>) -> Result<SystemConfig, SimError> {
    let base = match (preset, config) {
        (Some(p), _) => p.config(),
        (None, Some(_)) => SystemConfig::paper(),
        (None, None) => SystemConfig::desk(),
    };
    match config {
        Some(path) => load_config_over(path, &base),
        None => Ok(base),
    }
}

fn run(args: RunArgs) -> Result<(), SimError> {
    let base = base_config(args.config.as_ref(), args.preset)?;
    let mut spec = ExperimentSpec::new(args.experiment, base, args.seed);
    if let Some(names) = args.schemes {
        spec.schemes = names.iter().map(|n| n.trim().parse::<Scheme>()).collect::<Result<_, _>>()?;
    }
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(g) = args.grid {
        spec.grid = g;
    }
    let output = run_experiment(&spec)?;
    let files = emit_outputs(&output, &args.out, args.timing_in_records)?;
    let failed = output.failures.len();
    eprintln!(
        "{} records ({} failed runs), {} files in {}",
        output.records.len(),
        failed,
        files.len(),
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Config { config, preset } => base_config(config.as_ref(), preset).map(|c| print!("{}", to_toml(&c))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
