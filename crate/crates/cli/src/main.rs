use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use minimax_track::harness::{
    cmd_bench, cmd_plan, cmd_simulate, cmd_verify, SimulateOptions, VerifyOptions,
};
use minimax_track::simulation::SnapMode;

/// Log filter variable, e.g. `MINIMAX_TRACK_LOG=debug`.
const LOG_ENV: &str = "MINIMAX_TRACK_LOG";

#[derive(Parser)]
#[command(
    name = "minimax-track",
    version,
    about = "Minimax policy-tree planner for active target tracking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the policy tree for a scenario and write policy, bounds and tree as JSON.
    Plan {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep depths and epsilons, writing node counts as CSV.
    Bench {
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run closed-loop rollouts and write traces.csv and summary.json.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, value_enum, default_value_t = Mode::Snapped)]
        mode: Mode,
        /// First ground-truth seed (defaults to the scenario seed).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the randomized property suites; exits nonzero on any failure.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Plan with a deliberately broken redundancy test.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Snapped,
    Realistic,
}

impl From<Mode> for SnapMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Snapped => SnapMode::Snapped,
            Mode::Realistic => SnapMode::Realistic,
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Plan { scenario, out } => {
            let outcome = cmd_plan(&scenario, &out)
                .with_context(|| format!("planning {}", scenario.display()))?;
            println!("minimax value: {}", outcome.minimax_value);
            println!(
                "nodes: {} kept, {} pruned; bound {}",
                outcome.node_count_kept, outcome.node_count_pruned, outcome.bounds.combined
            );
        }
        Command::Bench { sweep, out } => {
            let rows = cmd_bench(&sweep, &out)
                .with_context(|| format!("running sweep {}", sweep.display()))?;
            println!("wrote {} rows to {}", rows.len(), out.display());
        }
        Command::Simulate {
            scenario,
            steps,
            runs,
            mode,
            seed,
            out_dir,
        } => {
            let opts = SimulateOptions {
                steps,
                runs,
                mode: mode.into(),
                base_seed: seed,
                out_dir,
            };
            let s = cmd_simulate(&scenario, &opts)
                .with_context(|| format!("simulating {}", scenario.display()))?;
            println!(
                "final trace over {} runs: mean {} std {} min {} max {} (minimax value {})",
                s.runs, s.mean, s.std, s.min, s.max, s.minimax_value
            );
        }
        Command::Verify {
            seed,
            count,
            inject_fault,
        } => {
            let report = cmd_verify(&VerifyOptions {
                seed,
                count,
                inject_fault,
            });
            for s in &report.suites {
                let status = if s.failed == 0 { "PASS" } else { "FAIL" };
                println!(
                    "{status} {}: {} passed, {} failed",
                    s.name, s.passed, s.failed
                );
                for f in &s.failures {
                    println!("    {f}");
                }
            }
            if !report.all_passed() {
                bail!("property violations found");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
