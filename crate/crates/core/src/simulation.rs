//! Closed-loop execution of minimax policies against a simulated target.
//!
//! The robot follows the tree: it applies the chosen control, receives a
//! measurement, matches it to the nearest candidate and descends into that
//! branch. When the tree's horizon is consumed the tree is rebuilt from the
//! current state.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::estimation::{kf_mean_update, noise_variance, EstimationError};
use crate::linalg::{SymMat2, Vec2};
use crate::planner::candidates::mix64;
use crate::planner::{build_from, NodeId, NodeKind, PlannerError, PolicyTree, PruneConfig};
use crate::scenario::Scenario;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("steps must be at least 1")]
    NoSteps,
    #[error("runs must be at least 1")]
    NoRuns,
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapMode {
    /// Filter the drawn measurement as is.
    Realistic,
    /// Replace the drawn measurement by its matched candidate before filtering.
    Snapped,
}

impl SnapMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SnapMode::Realistic => "realistic",
            SnapMode::Snapped => "snapped",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "realistic" => Some(SnapMode::Realistic),
            "snapped" => Some(SnapMode::Snapped),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub steps: usize,
    pub seed: u64,
    pub mode: SnapMode,
    /// Rebuild the tree after every measurement instead of at horizon exhaustion.
    pub replan_every_step: bool,
}

/// State of the simulated target; its noise uses the true range to the robot.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub target_pos: Vec2,
    pub rng_seed: u64,
    rng: ChaCha8Rng,
}

impl GroundTruth {
    pub fn new(target_pos: Vec2, rng_seed: u64) -> Self {
        Self {
            target_pos,
            rng_seed,
            rng: ChaCha8Rng::seed_from_u64(rng_seed),
        }
    }

    fn gaussian(&mut self, cov: SymMat2) -> Vec2 {
        let n = Vec2::new(
            StandardNormal.sample(&mut self.rng),
            StandardNormal.sample(&mut self.rng),
        );
        cov.sqrt_factor().mul_vec(n)
    }

    /// `z = H·x + w` with `w ~ N(0, σ²(‖r − x‖)·I)`.
    pub fn measure(&mut self, robot: Vec2, scenario: &Scenario) -> Vec2 {
        let w = noise_variance(robot, self.target_pos, &scenario.sensor);
        let h = scenario.sensor.obs_matrix_at(robot);
        h.mul_vec(self.target_pos) + self.gaussian(SymMat2::scaled_identity(w))
    }

    pub fn advance(&mut self, scenario: &Scenario) {
        let v = self.gaussian(scenario.target_model.process_noise);
        self.target_pos = scenario.target_model.dynamics.mul_vec(self.target_pos) + v;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRecord {
    pub time: usize,
    pub robot: Vec2,
    pub true_target: Vec2,
    pub est_mean: Vec2,
    pub est_cov: SymMat2,
    pub cov_trace: f64,
    pub measurement: Vec2,
    pub matched_candidate_index: usize,
    pub control_applied: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTrace {
    pub records: Vec<SimRecord>,
    /// Value of the first tree built, for reference.
    pub minimax_value: f64,
    pub replans: usize,
}

impl SimTrace {
    pub fn final_trace(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.cov_trace)
    }
}

/// Index of the candidate nearest to `z` (Euclidean); ties go to the lower index.
pub fn closest_candidate(z: Vec2, candidates: &[Vec2]) -> usize {
    assert!(!candidates.is_empty(), "candidate set is empty");
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in candidates.iter().enumerate() {
        let d = z.distance(*c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

pub fn run_closed_loop(
    scenario: &Scenario,
    prune: &PruneConfig,
    steps: usize,
    seed: u64,
    mode: SnapMode,
) -> Result<SimTrace, SimError> {
    run_closed_loop_with(
        scenario,
        prune,
        &SimOptions {
            steps,
            seed,
            mode,
            replan_every_step: false,
        },
    )
}

pub fn run_closed_loop_with(
    scenario: &Scenario,
    prune: &PruneConfig,
    opts: &SimOptions,
) -> Result<SimTrace, SimError> {
    if opts.steps == 0 {
        return Err(SimError::NoSteps);
    }
    let mut truth = GroundTruth::new(scenario.target_true0, opts.seed);
    let mut robot = scenario.robot_start;
    let mut est = scenario.target_estimate0;

    let mut tree = build_from(scenario, prune, robot, est, scenario.seed)?;
    let minimax_value = tree.minimax_value;
    let mut node = PolicyTree::ROOT;
    let mut replans = 0;
    let mut records = Vec::with_capacity(opts.steps);

    for t in 0..opts.steps {
        let exhausted =
            tree.node(node).kind != NodeKind::Control || tree.node(node).chosen.is_none();
        if t > 0 && (exhausted || opts.replan_every_step) {
            replans += 1;
            let plan_seed = mix64(scenario.seed ^ (t as u64));
            tree = build_from(scenario, prune, robot, est, plan_seed)?;
            node = PolicyTree::ROOT;
        }
        let meas_node: NodeId = tree.node(node).chosen.expect("control node has a choice");
        let m = tree.node(meas_node);
        let control = scenario.motion.controls[m.label.index().expect("control branch")];
        robot = m.robot;

        let raw = truth.measure(robot, scenario);
        let matched = closest_candidate(raw, &m.candidates);
        let z = match opts.mode {
            SnapMode::Realistic => raw,
            SnapMode::Snapped => m.candidates[matched],
        };
        let true_target = truth.target_pos;
        est = kf_mean_update(&est, z, &scenario.target_model, &scenario.sensor, robot)?;
        truth.advance(scenario);

        node = tree.child_by_index(meas_node, matched).unwrap_or(meas_node);
        records.push(SimRecord {
            time: t,
            robot,
            true_target,
            est_mean: est.mean,
            est_cov: est.cov,
            cov_trace: est.cov.trace(),
            measurement: z,
            matched_candidate_index: matched,
            control_applied: control,
        });
    }
    Ok(SimTrace {
        records,
        minimax_value,
        replans,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub runs: usize,
    pub steps: usize,
    pub mode: SnapMode,
    pub base_seed: u64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub minimax_value: f64,
}

pub fn run_monte_carlo(
    scenario: &Scenario,
    prune: &PruneConfig,
    steps: usize,
    num_runs: usize,
    base_seed: u64,
    mode: SnapMode,
) -> Result<(MonteCarloSummary, Vec<SimTrace>), SimError> {
    if num_runs == 0 {
        return Err(SimError::NoRuns);
    }
    let traces = (0..num_runs as u64)
        .map(|i| run_closed_loop(scenario, prune, steps, base_seed.wrapping_add(i), mode))
        .collect::<Result<Vec<_>, _>>()?;
    let finals: Vec<f64> = traces.iter().map(SimTrace::final_trace).collect();
    let n = finals.len() as f64;
    let mean = finals.iter().sum::<f64>() / n;
    let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let summary = MonteCarloSummary {
        runs: num_runs,
        steps,
        mode,
        base_seed,
        mean,
        std: var.sqrt(),
        min: finals.iter().copied().fold(f64::INFINITY, f64::min),
        max: finals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        minimax_value: traces[0].minimax_value,
    };
    Ok((summary, traces))
}

pub const TRACE_CSV_HEADER: [&str; 18] = [
    "run",
    "time",
    "robot_x",
    "robot_y",
    "true_x",
    "true_y",
    "est_x",
    "est_y",
    "cov_a11",
    "cov_a12",
    "cov_a22",
    "cov_trace",
    "meas_x",
    "meas_y",
    "matched_candidate",
    "control_x",
    "control_y",
    "seed",
];

/// Writes traces as CSV, one row per step; `seeds[i]` labels run `i`.
pub fn write_traces_csv<W: Write>(
    out: W,
    traces: &[SimTrace],
    seeds: &[u64],
) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_CSV_HEADER)?;
    for (run, (trace, seed)) in traces.iter().zip(seeds).enumerate() {
        for r in &trace.records {
            w.write_record(&[
                run.to_string(),
                r.time.to_string(),
                r.robot.x.to_string(),
                r.robot.y.to_string(),
                r.true_target.x.to_string(),
                r.true_target.y.to_string(),
                r.est_mean.x.to_string(),
                r.est_mean.y.to_string(),
                r.est_cov.a11.to_string(),
                r.est_cov.a12.to_string(),
                r.est_cov.a22.to_string(),
                r.cov_trace.to_string(),
                r.measurement.x.to_string(),
                r.measurement.y.to_string(),
                r.matched_candidate_index.to_string(),
                r.control_applied.x.to_string(),
                r.control_applied.y.to_string(),
                seed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
