//! `opentraj`: run scenarios from JSON configs or built-in presets.
//!
//! Exit status: 0 on success (and PASS for comparisons), 1 on invalid input,
//! 2 when a comparison fails its tolerance budget. `OPENTRAJ_THREADS` caps
//! the number of worker threads; it never changes the output.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use opentraj::harness::config::Mode;
use opentraj::harness::{parse_config, preset, run_scenario, HarnessError, RunOptions, ScenarioConfig};
use opentraj::Execution;

const THREADS_VAR: &str = "OPENTRAJ_THREADS";

#[derive(Parser)]
#[command(name = "opentraj", version, about = "Trajectory simulation of open fermionic chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: the config's output_path).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one seeded trajectory (open mode).
        #[arg(long)]
        single: bool,
    },
    /// Run a built-in scenario (fig2, fig3a, fig3b, fig3a-eta, fig4a, compare-l2, compare-l3).
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of trajectories.
        #[arg(long)]
        traj: Option<usize>,
        #[arg(long)]
        single: bool,
    },
    /// Compare the trajectory ensemble of a config against the Lindblad oracle.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Anything that ends the run with status 1.
struct Failure(String);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn execute(command: Command) -> Result<ExitCode, Failure> {
    let execution = Execution::with_threads(threads_from_env()?);
    let (cfg, out, single) = match command {
        Command::Run { config, out, single } => (load(&config)?, out, single),
        Command::Compare { config, out } => {
            let mut cfg = load(&config)?;
            cfg.mode = Mode::Compare;
            cfg.validate()
                .map_err(|e| Failure(format!("{}: {e}", config.display())))?;
            (cfg, out, false)
        }
        Command::Preset {
            name,
            out,
            seed,
            traj,
            single,
        } => {
            let mut cfg = preset(&name).map_err(classify)?;
            if let Some(seed) = seed {
                cfg.run.seed = seed;
            }
            if let Some(traj) = traj {
                cfg.run.trajectories = traj;
            }
            cfg.validate().map_err(|e| Failure(e.to_string()))?;
            (cfg, out, single)
        }
    };
    let out_dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output_path));
    let opts = RunOptions {
        out_dir,
        execution,
        single,
    };
    let outcome = run_scenario(&cfg, &opts).map_err(classify)?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    match outcome.verdict {
        Some(v) => {
            println!(
                "{}: max |n_traj - n_oracle| = {:.4}, worst excess {:+.2e} at site {} t = {} ({} of {} points outside 3 se + {})",
                v.verdict, v.max_deviation, v.max_excess, v.worst_site, v.worst_time, v.failed_points, v.points, v.bias_budget
            );
            Ok(if v.passed { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        None => Ok(ExitCode::SUCCESS),
    }
}

fn load(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn classify(e: HarnessError) -> Failure {
    Failure(e.to_string())
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Failure(format!("{THREADS_VAR} must be a positive integer, got {v:?}"))),
        },
    }
}
