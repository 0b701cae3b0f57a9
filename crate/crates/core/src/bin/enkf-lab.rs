use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use enkf_lab::commands::{cmd_plot, cmd_run, cmd_sweep, cmd_trajectory, OutputFormat};
use enkf_lab::config::{config_reference, parse_config};
use enkf_lab::experiments::TwinExperimentConfig;

/// Ensemble Kalman filter twin experiments on the Lorenz 63 system.
#[derive(Debug, Parser)]
#[command(name = "enkf-lab", version)]
struct Cli {
    /// Experiment config file (`key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Seed for `run`; first of the consecutive seeds for `sweep`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Output directory, created if absent.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Both)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the truth and write trajectory.csv / trajectory.svg.
    Trajectory,
    /// One twin experiment: run_N{N}_seed{seed}.csv / .svg.
    Run {
        /// Ensemble size [default: first of ensemble_sizes].
        #[arg(long, short = 'n', value_name = "N")]
        members: Option<usize>,
    },
    /// All ensemble sizes over all seeds: sweep.csv, summary.csv, sweep.svg.
    Sweep,
    /// Re-render SVGs from the CSVs in --out.
    Plot,
}

fn load_config(path: Option<&PathBuf>) -> enkf_lab::Result<TwinExperimentConfig> {
    match path {
        None => Ok(TwinExperimentConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| enkf_lab::Error::Io { path: p.clone(), source })?;
            parse_config(&text)
        }
    }
}

fn execute(cli: &Cli) -> enkf_lab::Result<Vec<PathBuf>> {
    let mut config = load_config(cli.config.as_ref())?;
    match &cli.command {
        Command::Trajectory => cmd_trajectory(&config, &cli.out, cli.format),
        Command::Run { members } => {
            let n = members.unwrap_or(config.ensemble_sizes[0]);
            let seed = cli.seed.unwrap_or(config.seeds[0]);
            cmd_run(&config, n, seed, &cli.out, cli.format)
        }
        Command::Sweep => {
            if let Some(base) = cli.seed {
                let count = config.seeds.len() as u64;
                config.seeds = (0..count).map(|i| base.wrapping_add(i)).collect();
            }
            cmd_sweep(&config, &cli.out, cli.format)
        }
        Command::Plot => cmd_plot(&cli.out),
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().after_help(config_reference()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
