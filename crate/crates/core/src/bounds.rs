//! Suboptimality certificates for the relaxed pruning rules.

use serde::Serialize;

use crate::estimation::{closed_loop_transition, Result, TargetModel};
use crate::linalg::{Mat2, SymMat2};
use crate::planner::{NodeKind, PolicyTree};
use crate::scenario::Scenario;

/// One measurement level along the returned trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryStep {
    /// Prior covariance when the measurement is taken.
    pub cov: SymMat2,
    pub obs_matrix: Mat2,
    /// Scalar measurement noise variance used at that level.
    pub noise_var: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub eps1_bound: f64,
    pub eps2_bound: f64,
    pub combined: f64,
    pub trajectory_covs: Vec<SymMat2>,
}

/// The alpha relaxation overestimates the optimum by at most `eps1`.
pub fn eps1_bound(eps1: f64) -> f64 {
    eps1
}

/// `ε₂ · Σ_{j=0..k} tr(P_j P_jᵀ)` with `P_j = F_{k−1}Σ_{k−1} ⋯ F_jΣ_j`
/// (`P_k = I`) and `F_i = C − C·K_i·H_i` the closed-loop transition at step `i`.
pub fn eps2_bound(steps: &[TrajectoryStep], model: &TargetModel, eps2: f64) -> Result<f64> {
    let factors = steps
        .iter()
        .map(|s| {
            Ok(closed_loop_transition(s.cov, model, s.obs_matrix, s.noise_var)? * s.cov.to_mat())
        })
        .collect::<Result<Vec<Mat2>>>()?;
    let mut total = 0.0;
    let mut product = Mat2::IDENTITY;
    total += product.congruence(SymMat2::IDENTITY).trace();
    for f in factors.iter().rev() {
        product = product * *f;
        total += product.congruence(SymMat2::IDENTITY).trace();
    }
    Ok(eps2 * total)
}

pub fn combined_bound(eps1: f64, b_eps2: f64) -> f64 {
    eps1.max(b_eps2)
}

/// Measurement levels along the tree's minimax path.
pub fn minimax_trajectory(tree: &PolicyTree, scenario: &Scenario) -> Vec<TrajectoryStep> {
    tree.minimax_path()
        .into_iter()
        .map(|id| tree.node(id))
        .filter(|n| n.kind == NodeKind::Measurement)
        .map(|n| TrajectoryStep {
            cov: n.estimate.cov,
            obs_matrix: scenario.sensor.obs_matrix_at(n.robot),
            noise_var: n.noise_var.expect("measurement nodes cache their noise"),
        })
        .collect()
}

pub fn bound_report(tree: &PolicyTree, scenario: &Scenario) -> Result<BoundReport> {
    let steps = minimax_trajectory(tree, scenario);
    let b1 = eps1_bound(tree.prune.eps1);
    let b2 = eps2_bound(&steps, &scenario.target_model, tree.prune.eps2)?;
    Ok(BoundReport {
        eps1_bound: b1,
        eps2_bound: b2,
        combined: combined_bound(b1, b2),
        trajectory_covs: steps.iter().map(|s| s.cov).collect(),
    })
}
