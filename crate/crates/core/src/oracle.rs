//! Brute-force minimax by plain recursion over every control and candidate.
//!
//! Shares only the estimation primitives and the candidate generator (same
//! per-node seeds) with the planner, so it serves as a reference for the
//! pruned tree. Exponential; keep horizons small.

use crate::estimation::{kf_mean_update, Result, TargetEstimate};
use crate::linalg::Vec2;
use crate::planner::candidates::{candidate_seed, child_path_hash, generate_candidates};
use crate::scenario::Scenario;

/// Minimax value of the full tree rooted at the scenario's initial state.
pub fn full_minimax(scenario: &Scenario) -> Result<f64> {
    full_minimax_from(
        scenario,
        scenario.robot_start,
        scenario.target_estimate0,
        scenario.seed,
    )
}

pub fn full_minimax_from(
    scenario: &Scenario,
    robot: Vec2,
    estimate: TargetEstimate,
    seed: u64,
) -> Result<f64> {
    let oracle = Oracle { scenario, seed };
    oracle.min_over_controls(0, robot, estimate, 0)
}

/// Value of each root control branch, in control-set order.
pub fn root_branch_values(scenario: &Scenario) -> Result<Vec<f64>> {
    let oracle = Oracle {
        scenario,
        seed: scenario.seed,
    };
    let est = scenario.target_estimate0;
    scenario
        .motion
        .controls
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            oracle.max_over_candidates(0, scenario.robot_start + u, est, child_path_hash(0, i))
        })
        .collect()
}

struct Oracle<'a> {
    scenario: &'a Scenario,
    seed: u64,
}

impl Oracle<'_> {
    fn min_over_controls(
        &self,
        step: usize,
        robot: Vec2,
        est: TargetEstimate,
        hash: u64,
    ) -> Result<f64> {
        if step == self.scenario.horizon {
            return Ok(est.cov.trace());
        }
        let mut best = f64::INFINITY;
        for (i, &u) in self.scenario.motion.controls.iter().enumerate() {
            let v = self.max_over_candidates(step, robot + u, est, child_path_hash(hash, i))?;
            best = best.min(v);
        }
        Ok(best)
    }

    fn max_over_candidates(
        &self,
        step: usize,
        robot: Vec2,
        est: TargetEstimate,
        hash: u64,
    ) -> Result<f64> {
        let sc = self.scenario;
        let cands = generate_candidates(
            &est,
            &sc.sensor,
            robot,
            sc.candidates,
            sc.candidate_mode,
            candidate_seed(self.seed, hash),
        )?;
        let mut worst = f64::NEG_INFINITY;
        for (j, z) in cands.points.into_iter().enumerate() {
            let next = kf_mean_update(&est, z, &sc.target_model, &sc.sensor, robot)?;
            let v = self.min_over_controls(step + 1, robot, next, child_path_hash(hash, j))?;
            worst = worst.max(v);
        }
        Ok(worst)
    }
}
