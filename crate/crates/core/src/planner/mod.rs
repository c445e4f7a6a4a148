//! Minimax policy-tree planner: candidate generation, tree construction,
//! pruning rules and policy extraction.

pub mod candidates;
pub mod count;
pub mod export;
pub mod policy;
pub mod prune;
pub mod tree;

pub use candidates::{generate_candidates, CandidateMode, CandidateSet};
pub use count::{full_tree_size, CountError};
pub use policy::{extract_policy, Policy};
pub use prune::{alpha_cutoff, redundancy_prunable, DominationMode, NodeView, PruneConfig};
pub use tree::{
    build_from, build_tree, BranchLabel, NodeId, NodeKind, NodeStatus, PlannerError, PolicyTree,
    TreeNode,
};
