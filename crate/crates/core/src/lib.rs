//! Minimax policy-tree planning for active target tracking with
//! distance-dependent measurement noise.
//!
//! The robot picks among a finite set of moves; nature answers with one of a
//! finite set of candidate measurements. The planner minimizes the worst-case
//! trace of the target covariance at the horizon, pruning the tree with alpha
//! cutoffs and covariance-domination (redundancy) tests, optionally relaxed by
//! `ε₁`/`ε₂` with certified suboptimality bounds.

pub mod bounds;
pub mod estimation;
pub mod harness;
pub mod linalg;
pub mod oracle;
pub mod planner;
pub mod scenario;
pub mod simulation;

pub use estimation::{MotionModel, SensorModel, TargetEstimate, TargetModel};
pub use linalg::{Mat2, SymMat2, Vec2};
pub use planner::{build_tree, PolicyTree, PruneConfig};
pub use scenario::Scenario;
