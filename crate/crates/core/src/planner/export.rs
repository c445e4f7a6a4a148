//! Structured-text export of policy trees and node-count statistics.

use serde::Serialize;

use super::tree::{BranchLabel, NodeId, NodeKind, NodeStatus, PolicyTree};
use crate::linalg::SymMat2;

pub const EXPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct ExportNode {
    pub kind: NodeKind,
    pub depth: usize,
    pub label: BranchLabel,
    pub status: NodeStatus,
    pub robot: [f64; 2],
    pub mean: [f64; 2],
    pub covariance: SymMat2,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement: Option<[f64; 2]>,
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub cutoff: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ExportNode>,
}

pub fn export_subtree(tree: &PolicyTree, id: NodeId) -> ExportNode {
    let n = tree.node(id);
    ExportNode {
        kind: n.kind,
        depth: n.depth,
        label: n.label,
        status: n.status,
        robot: n.robot.into(),
        mean: n.estimate.mean.into(),
        covariance: n.estimate.cov,
        measurement: n.measurement.map(Into::into),
        value: n.value,
        cutoff: n.cutoff,
        children: n
            .children
            .iter()
            .map(|&c| export_subtree(tree, c))
            .collect(),
    }
}

pub fn export_tree(tree: &PolicyTree) -> ExportNode {
    export_subtree(tree, PolicyTree::ROOT)
}

/// One row of the node-count statistics CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeStatsRow {
    pub scenario_digest: String,
    pub eps1: f64,
    pub eps2: f64,
    pub kept: usize,
    pub pruned: usize,
    pub full_size: u64,
    pub minimax_value: f64,
}

impl NodeStatsRow {
    pub fn from_tree(tree: &PolicyTree, full_size: u64) -> Self {
        Self {
            scenario_digest: tree.scenario_digest.clone(),
            eps1: tree.prune.eps1,
            eps2: tree.prune.eps2,
            kept: tree.node_count_kept,
            pruned: tree.node_count_pruned,
            full_size,
            minimax_value: tree.minimax_value,
        }
    }
}

/// Nodes of a given kind, for quick structural summaries.
pub fn count_kind(tree: &PolicyTree, kind: NodeKind) -> usize {
    tree.nodes()
        .iter()
        .filter(|n| n.kind == kind && n.is_kept())
        .count()
}
