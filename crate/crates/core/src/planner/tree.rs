//! Depth-first construction of the alternating min/max policy tree.
//!
//! Depth 0 is the root Control node. Odd depths hold Measurement nodes (the
//! robot has just moved; nature picks a candidate measurement), even depths
//! Control nodes, and depth `2T` the leaves, valued at `trace(Σ_T)`.
//!
//! Alpha pruning uses the best completed branch of the nearest Control
//! ancestor. A Measurement node whose cutoff fired is left partially expanded
//! and is excluded from its parent's minimum. Redundancy pruning removes
//! Measurement nodes, i.e. options of the minimizing robot.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::candidates::{candidate_seed, child_path_hash, generate_candidates};
use super::count::{full_tree_size, CountError};
use super::prune::{alpha_cutoff, dominated, may_dominate, DominationMode, PruneConfig};
use crate::estimation::{kf_mean_update, noise_variance, EstimationError, TargetEstimate};
use crate::linalg::{SymMat2, Vec2};
use crate::scenario::Scenario;

/// Unpruned trees larger than this are refused rather than materialized.
pub const MAX_UNPRUNED_NODES: u64 = 1_000_000;

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("candidate count must be at least 1")]
    NoCandidates,
    #[error("control set is empty")]
    NoControls,
    #[error("unpruned tree would have {full} nodes (limit {limit})")]
    TreeTooLarge { full: u64, limit: u64 },
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Control,
    Measurement,
    Leaf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    Kept,
    AlphaPruned,
    RedundancyPruned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchLabel {
    Root,
    Control(usize),
    Candidate(usize),
}

impl BranchLabel {
    pub fn index(self) -> Option<usize> {
        match self {
            BranchLabel::Root => None,
            BranchLabel::Control(i) | BranchLabel::Candidate(i) => Some(i),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub depth: usize,
    pub robot: Vec2,
    pub estimate: TargetEstimate,
    pub label: BranchLabel,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Backed-up value; `None` for pruned nodes that were never expanded.
    pub value: Option<f64>,
    pub status: NodeStatus,
    /// Measurement node whose remaining children were skipped by an alpha cutoff.
    pub cutoff: bool,
    /// Certified bound on how far `value` may exceed the unpruned value
    /// because of relaxed alpha cutoffs below this node.
    pub value_slack: f64,
    /// Child realizing the min (Control) or max (Measurement) backup.
    pub chosen: Option<NodeId>,
    /// Measurement noise variance used for this node's update (Measurement nodes).
    pub noise_var: Option<f64>,
    /// Candidate measurements generated at this node (Measurement nodes).
    pub candidates: Vec<Vec2>,
    /// The candidate that produced this node (children of Measurement nodes).
    pub measurement: Option<Vec2>,
    pub(crate) path_hash: u64,
}

impl TreeNode {
    pub fn is_kept(&self) -> bool {
        self.status == NodeStatus::Kept
    }
}

#[derive(Debug, Clone)]
pub struct PolicyTree {
    nodes: Vec<TreeNode>,
    pub minimax_value: f64,
    pub node_count_kept: usize,
    pub node_count_pruned: usize,
    pub scenario_digest: String,
    pub horizon: usize,
    pub prune: PruneConfig,
}

impl PolicyTree {
    pub const ROOT: NodeId = 0;

    pub fn root(&self) -> &TreeNode {
        &self.nodes[Self::ROOT]
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Branch indices from the root to `id`.
    pub fn path_to(&self, id: NodeId) -> Vec<usize> {
        let mut path = Vec::with_capacity(self.nodes[id].depth);
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            path.push(self.nodes[cur].label.index().expect("non-root has a label"));
            cur = p;
        }
        path.reverse();
        path
    }

    /// Root-to-leaf path following the minimizing control and the maximizing
    /// candidate at every level.
    pub fn minimax_path(&self) -> Vec<NodeId> {
        let mut path = vec![Self::ROOT];
        let mut cur = Self::ROOT;
        while let Some(next) = self.nodes[cur].chosen {
            path.push(next);
            cur = next;
        }
        path
    }

    /// Kept child of `id` reached through branch `index`, if it was expanded.
    pub fn child_by_index(&self, id: NodeId, index: usize) -> Option<NodeId> {
        self.nodes[id]
            .children
            .iter()
            .copied()
            .find(|&c| self.nodes[c].label.index() == Some(index) && self.nodes[c].is_kept())
    }
}

/// Builds the policy tree for `scenario` with the pruning rules in `prune`.
pub fn build_tree(scenario: &Scenario, prune: &PruneConfig) -> Result<PolicyTree, PlannerError> {
    build_from(
        scenario,
        prune,
        scenario.robot_start,
        scenario.target_estimate0,
        scenario.seed,
    )
}

/// Builds a tree rooted at an arbitrary robot position and estimate, used for
/// receding-horizon replanning.
pub fn build_from(
    scenario: &Scenario,
    prune: &PruneConfig,
    robot: Vec2,
    estimate: TargetEstimate,
    seed: u64,
) -> Result<PolicyTree, PlannerError> {
    if scenario.horizon == 0 {
        return Err(PlannerError::ZeroHorizon);
    }
    if scenario.candidates == 0 {
        return Err(PlannerError::NoCandidates);
    }
    if scenario.motion.is_empty() {
        return Err(PlannerError::NoControls);
    }
    if !prune.any_enabled() {
        let full = full_tree_size(
            scenario.motion.len() as u64,
            scenario.candidates as u64,
            (2 * scenario.horizon + 1) as u32,
        )?;
        if full > MAX_UNPRUNED_NODES {
            return Err(PlannerError::TreeTooLarge {
                full,
                limit: MAX_UNPRUNED_NODES,
            });
        }
    }

    let mut builder = Builder {
        scenario,
        prune,
        seed,
        nodes: Vec::new(),
        peers: vec![HashMap::new(); 2 * scenario.horizon + 1],
    };
    builder.nodes.push(TreeNode {
        kind: NodeKind::Control,
        depth: 0,
        robot,
        estimate,
        label: BranchLabel::Root,
        parent: None,
        children: Vec::new(),
        value: None,
        status: NodeStatus::Kept,
        cutoff: false,
        value_slack: 0.0,
        chosen: None,
        noise_var: None,
        candidates: Vec::new(),
        measurement: None,
        path_hash: 0,
    });
    let (value, _) = builder.expand_control(PolicyTree::ROOT)?;

    let kept = builder.nodes.iter().filter(|n| n.is_kept()).count();
    let pruned = builder.nodes.len() - kept;
    Ok(PolicyTree {
        nodes: builder.nodes,
        minimax_value: value,
        node_count_kept: kept,
        node_count_pruned: pruned,
        scenario_digest: scenario.digest(),
        horizon: scenario.horizon,
        prune: *prune,
    })
}

struct Builder<'a> {
    scenario: &'a Scenario,
    prune: &'a PruneConfig,
    seed: u64,
    nodes: Vec<TreeNode>,
    /// Per depth: robot position bits → redundancy peers (Measurement nodes).
    peers: Vec<HashMap<(u64, u64), Vec<NodeId>>>,
}

impl Builder<'_> {
    fn leaf_depth(&self) -> usize {
        2 * self.scenario.horizon
    }

    fn push(&mut self, node: TreeNode) -> NodeId {
        let id = self.nodes.len();
        if let Some(p) = node.parent {
            self.nodes[p].children.push(id);
        }
        self.nodes.push(node);
        id
    }

    /// Returns `(value, value_slack)`.
    fn expand_control(&mut self, id: NodeId) -> Result<(f64, f64), PlannerError> {
        let depth = self.nodes[id].depth;
        if depth == self.leaf_depth() {
            let v = self.nodes[id].estimate.cov.trace();
            self.nodes[id].value = Some(v);
            return Ok((v, 0.0));
        }
        let robot = self.nodes[id].robot;
        let estimate = self.nodes[id].estimate;
        let parent_hash = self.nodes[id].path_hash;
        let n = self.scenario.motion.len();

        let mut best = f64::INFINITY;
        let mut chosen = None;
        let mut max_slack: f64 = 0.0;
        let mut any_cut = false;
        let mut retained = 0usize;

        for i in 0..n {
            let next_robot = self.scenario.motion.apply_index(robot, i);
            let child = self.push(TreeNode {
                kind: NodeKind::Measurement,
                depth: depth + 1,
                robot: next_robot,
                estimate,
                label: BranchLabel::Control(i),
                parent: Some(id),
                children: Vec::new(),
                value: None,
                status: NodeStatus::Kept,
                cutoff: false,
                value_slack: 0.0,
                chosen: None,
                noise_var: Some(noise_variance(
                    next_robot,
                    estimate.mean,
                    &self.scenario.sensor,
                )),
                candidates: Vec::new(),
                measurement: None,
                path_hash: child_path_hash(parent_hash, i),
            });

            let last_chance = i + 1 == n && retained == 0;
            if self.prune.redundancy_enabled && !last_chance && self.is_redundant(child) {
                self.nodes[child].status = NodeStatus::RedundancyPruned;
                continue;
            }
            self.peers[depth + 1]
                .entry(next_robot.bits())
                .or_default()
                .push(child);
            retained += 1;

            let (v, slack, cut) = self.expand_measurement(child, best)?;
            if cut {
                any_cut = true;
                continue;
            }
            max_slack = max_slack.max(slack);
            if v < best {
                best = v;
                chosen = Some(child);
            }
        }

        let slack = if any_cut {
            max_slack.max(self.prune.eps1)
        } else {
            max_slack
        };
        let node = &mut self.nodes[id];
        node.value = Some(best);
        node.value_slack = slack;
        node.chosen = chosen;
        Ok((best, slack))
    }

    /// Returns `(value, value_slack, cutoff_fired)`.
    fn expand_measurement(
        &mut self,
        id: NodeId,
        alpha: f64,
    ) -> Result<(f64, f64, bool), PlannerError> {
        let sc = self.scenario;
        let robot = self.nodes[id].robot;
        let estimate = self.nodes[id].estimate;
        let depth = self.nodes[id].depth;
        let path_hash = self.nodes[id].path_hash;
        let seed = candidate_seed(self.seed, path_hash);
        let cands = generate_candidates(
            &estimate,
            &sc.sensor,
            robot,
            sc.candidates,
            sc.candidate_mode,
            seed,
        )?;
        let child_kind = if depth + 1 == self.leaf_depth() {
            NodeKind::Leaf
        } else {
            NodeKind::Control
        };

        let mut worst = f64::NEG_INFINITY;
        let mut lower = f64::NEG_INFINITY;
        let mut chosen = None;
        let mut max_slack: f64 = 0.0;
        let mut cut = false;
        let k = cands.points.len();

        for (j, z) in cands.points.iter().copied().enumerate() {
            let next = kf_mean_update(&estimate, z, &sc.target_model, &sc.sensor, robot)?;
            let child = self.push(TreeNode {
                kind: child_kind,
                depth: depth + 1,
                robot,
                estimate: next,
                label: BranchLabel::Candidate(j),
                parent: Some(id),
                children: Vec::new(),
                value: None,
                status: if cut {
                    NodeStatus::AlphaPruned
                } else {
                    NodeStatus::Kept
                },
                cutoff: false,
                value_slack: 0.0,
                chosen: None,
                noise_var: None,
                candidates: Vec::new(),
                measurement: Some(z),
                path_hash: child_path_hash(path_hash, j),
            });
            if cut {
                continue;
            }
            let (v, slack) = self.expand_control(child)?;
            if v > worst {
                worst = v;
                chosen = Some(child);
            }
            max_slack = max_slack.max(slack);
            lower = lower.max(v - slack);
            if self.prune.alpha_enabled && j + 1 < k && alpha_cutoff(alpha, lower, self.prune.eps1)
            {
                cut = true;
            }
        }

        let node = &mut self.nodes[id];
        node.candidates = cands.points;
        node.value = Some(worst);
        node.value_slack = max_slack;
        node.chosen = chosen;
        node.cutoff = cut;
        Ok((worst, max_slack, cut))
    }

    fn remaining_meas_steps(&self, depth: usize) -> usize {
        // a Measurement node at depth 2m+1 has m measurements behind it
        self.scenario.horizon - depth / 2
    }

    fn lca_is_control(&self, a: NodeId, b: NodeId) -> bool {
        let (mut a, mut b) = (a, b);
        while a != b {
            a = self.nodes[a]
                .parent
                .expect("equal depths meet before the root");
            b = self.nodes[b]
                .parent
                .expect("equal depths meet before the root");
        }
        self.nodes[a].kind == NodeKind::Control
    }

    fn is_redundant(&self, id: NodeId) -> bool {
        let node = &self.nodes[id];
        let Some(bucket) = self.peers[node.depth].get(&node.robot.bits()) else {
            return false;
        };
        let k = self.remaining_meas_steps(node.depth);
        let sensor = &self.scenario.sensor;
        let h = sensor.obs_matrix_at(node.robot);
        let cov = node.estimate.cov;
        if !may_dominate(cov, h, k, sensor, self.prune) {
            return false;
        }

        match self.prune.domination {
            DominationMode::Pairwise => bucket.iter().any(|&p| {
                dominated(cov, &[self.nodes[p].estimate.cov], h, k, sensor, self.prune)
                    && self.lca_is_control(id, p)
            }),
            DominationMode::SimplexGrid { .. } => {
                let mut covs: Vec<SymMat2> = Vec::new();
                for &p in bucket {
                    let c = self.nodes[p].estimate.cov;
                    if !covs.contains(&c) && self.lca_is_control(id, p) {
                        covs.push(c);
                    }
                }
                !covs.is_empty() && dominated(cov, &covs, h, k, sensor, self.prune)
            }
        }
    }
}
