use std::path::Path;

use serde::Serialize;

use super::{io_err, HarnessError, OUTPUT_SCHEMA_VERSION};
use crate::bounds::{bound_report, BoundReport};
use crate::planner::export::{export_tree, ExportNode};
use crate::planner::{build_tree, extract_policy, full_tree_size, Policy, PruneConfig};
use crate::scenario::load_scenario;

#[derive(Debug, Clone, Serialize)]
pub struct PlanOutcome {
    pub schema_version: u32,
    pub scenario_digest: String,
    pub horizon: usize,
    pub prune: PruneConfig,
    pub minimax_value: f64,
    pub node_count_kept: usize,
    pub node_count_pruned: usize,
    /// Size of the unpruned tree, if it fits in 64 bits.
    pub full_nodes: Option<u64>,
    pub policy: Policy,
    pub bounds: BoundReport,
    pub tree: ExportNode,
}

/// Builds the tree for the scenario file and writes the policy, bound report
/// and tree export as JSON to `out_path`.
pub fn cmd_plan(scenario_path: &Path, out_path: &Path) -> Result<PlanOutcome, HarnessError> {
    let scenario = load_scenario(scenario_path)?;
    let tree = build_tree(&scenario, &scenario.prune)?;
    let full_nodes = full_tree_size(
        scenario.motion.len() as u64,
        scenario.candidates as u64,
        (2 * scenario.horizon + 1) as u32,
    )
    .ok();
    let outcome = PlanOutcome {
        schema_version: OUTPUT_SCHEMA_VERSION,
        scenario_digest: tree.scenario_digest.clone(),
        horizon: tree.horizon,
        prune: tree.prune,
        minimax_value: tree.minimax_value,
        node_count_kept: tree.node_count_kept,
        node_count_pruned: tree.node_count_pruned,
        full_nodes,
        policy: extract_policy(&tree),
        bounds: bound_report(&tree, &scenario)?,
        tree: export_tree(&tree),
    };
    let json = serde_json::to_string_pretty(&outcome)?;
    std::fs::write(out_path, json + "\n").map_err(io_err(out_path))?;
    log::info!(
        "planned {}: value {} with {} kept / {} pruned nodes",
        scenario_path.display(),
        outcome.minimax_value,
        outcome.node_count_kept,
        outcome.node_count_pruned
    );
    Ok(outcome)
}
