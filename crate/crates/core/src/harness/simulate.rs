use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{io_err, HarnessError, OUTPUT_SCHEMA_VERSION};
use crate::scenario::load_scenario;
use crate::simulation::{run_monte_carlo, write_traces_csv, MonteCarloSummary, SnapMode};

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub steps: usize,
    pub runs: usize,
    pub mode: SnapMode,
    /// First ground-truth seed; defaults to the scenario seed.
    pub base_seed: Option<u64>,
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    schema_version: u32,
    scenario_digest: String,
    #[serde(flatten)]
    summary: &'a MonteCarloSummary,
}

/// Runs the Monte-Carlo rollouts and writes `traces.csv` and `summary.json`
/// into the output directory.
pub fn cmd_simulate(
    scenario_path: &Path,
    opts: &SimulateOptions,
) -> Result<MonteCarloSummary, HarnessError> {
    let scenario = load_scenario(scenario_path)?;
    let base_seed = opts.base_seed.unwrap_or(scenario.seed);
    let (summary, traces) = run_monte_carlo(
        &scenario,
        &scenario.prune,
        opts.steps,
        opts.runs,
        base_seed,
        opts.mode,
    )?;

    std::fs::create_dir_all(&opts.out_dir).map_err(io_err(&opts.out_dir))?;
    let traces_path = opts.out_dir.join("traces.csv");
    let file = File::create(&traces_path).map_err(io_err(&traces_path))?;
    let seeds: Vec<u64> = (0..opts.runs as u64)
        .map(|i| base_seed.wrapping_add(i))
        .collect();
    write_traces_csv(BufWriter::new(file), &traces, &seeds)?;

    let summary_path = opts.out_dir.join("summary.json");
    let doc = SummaryDoc {
        schema_version: OUTPUT_SCHEMA_VERSION,
        scenario_digest: scenario.digest(),
        summary: &summary,
    };
    let json = serde_json::to_string_pretty(&doc)?;
    std::fs::write(&summary_path, json + "\n").map_err(io_err(&summary_path))?;
    Ok(summary)
}
