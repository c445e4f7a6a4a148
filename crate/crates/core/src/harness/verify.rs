//! Randomized property runner: Riccati monotonicity, oracle equivalence of
//! the pruned planner, the `ε₁`/`ε₂` sandwiches and PSD closure.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::gen::{random_monotone_pair, random_psd, random_scenario, ScenarioLimits};
use super::{HarnessError, ORACLE_TOL};
use crate::bounds::bound_report;
use crate::estimation::{check_riccati_monotone, riccati_step};
use crate::linalg::{Vec2, TOL_PSD};
use crate::oracle::full_minimax;
use crate::planner::candidates::mix64;
use crate::planner::{build_tree, PruneConfig};
use crate::scenario::Scenario;

pub const EPS1_GRID: [f64; 3] = [0.01, 0.1, 1.0];
pub const EPS2_GRID: [f64; 2] = [0.01, 0.1];

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    pub count: usize,
    /// Run the planner with a deliberately broken redundancy test.
    pub inject_fault: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    /// Up to five failure descriptions, each naming its case seed.
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: 0,
            failed: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, case_seed: u64, outcome: Result<(), String>) {
        match outcome {
            Ok(()) => self.passed += 1,
            Err(msg) => {
                self.failed += 1;
                if self.failures.len() < 5 {
                    self.failures.push(format!("case seed {case_seed}: {msg}"));
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub count: usize,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.failed == 0)
    }
}

/// Seed of case `i` in a suite; independent across suites via `salt`.
pub fn case_seed(seed: u64, salt: u64, i: usize) -> u64 {
    mix64(seed ^ mix64(salt.wrapping_mul(0x100_0000_01B3) ^ i as u64))
}

fn planner_config(eps1: f64, eps2: f64, inject_fault: bool) -> PruneConfig {
    PruneConfig {
        fault_flip_noise_term: inject_fault,
        ..PruneConfig::relaxed(eps1, eps2)
    }
}

pub fn monotone_case(case: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(case);
    let p = random_monotone_pair(&mut rng);
    match check_riccati_monotone(p.cov_a, p.cov_b, p.s_a, p.s_b, &p.model, &p.sensor) {
        Ok(true) => Ok(()),
        Ok(false) => Err(format!(
            "rho(A) - rho(B) not PSD for A={:?} B={:?} s_a={} s_b={}",
            p.cov_a, p.cov_b, p.s_a, p.s_b
        )),
        Err(e) => Err(e.to_string()),
    }
}

pub fn oracle_case(scenario: &Scenario, prune: &PruneConfig) -> Result<(f64, f64), HarnessError> {
    let j_star = full_minimax(scenario)?;
    let tree = build_tree(scenario, prune)?;
    Ok((j_star, tree.minimax_value))
}

fn sandwich(scenario: &Scenario, prune: &PruneConfig, j_star: f64) -> Result<(), String> {
    let tree = build_tree(scenario, prune).map_err(|e| e.to_string())?;
    let bound = bound_report(&tree, scenario)
        .map_err(|e| e.to_string())?
        .combined;
    let gap = tree.minimax_value - j_star;
    if gap < -ORACLE_TOL || gap > bound + ORACLE_TOL {
        return Err(format!(
            "eps ({}, {}): J - J* = {gap} outside [0, {bound}]",
            prune.eps1, prune.eps2
        ));
    }
    Ok(())
}

pub fn psd_closure_case(case: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(case);
    let pair = random_monotone_pair(&mut rng);
    let cov = random_psd(&mut rng, 0.0, 10.0);
    let robot = Vec2::new(rand::Rng::random_range(&mut rng, -10.0..10.0), 0.0);
    let target = Vec2::new(0.0, rand::Rng::random_range(&mut rng, -10.0..10.0));
    let out =
        riccati_step(cov, &pair.model, &pair.sensor, robot, target).map_err(|e| e.to_string())?;
    let min_eig = out.min_eigenvalue();
    if min_eig < -TOL_PSD {
        return Err(format!("min eigenvalue {min_eig}"));
    }
    Ok(())
}

pub fn cmd_verify(opts: &VerifyOptions) -> VerifyReport {
    let VerifyOptions {
        seed,
        count,
        inject_fault,
    } = *opts;
    let mut monotone = SuiteResult::new("riccati_monotone");
    for i in 0..count {
        let c = case_seed(seed, 1, i);
        monotone.record(c, monotone_case(c));
    }

    let mut oracle = SuiteResult::new("oracle_equivalence");
    let mut eps1 = SuiteResult::new("eps1_sandwich");
    let mut eps2 = SuiteResult::new("eps2_sandwich");
    for i in 0..count {
        let c = case_seed(seed, 2, i);
        let sc = random_scenario(c, ScenarioLimits::default());
        let j_star = match full_minimax(&sc) {
            Ok(j) => j,
            Err(e) => {
                for s in [&mut oracle, &mut eps1, &mut eps2] {
                    s.record(c, Err(e.to_string()));
                }
                continue;
            }
        };
        let exact =
            build_tree(&sc, &planner_config(0.0, 0.0, inject_fault)).map_err(|e| e.to_string());
        oracle.record(
            c,
            exact.and_then(|t| {
                let d = t.minimax_value - j_star;
                if d.abs() <= ORACLE_TOL {
                    Ok(())
                } else {
                    Err(format!("pruned {} vs oracle {j_star}", t.minimax_value))
                }
            }),
        );
        eps1.record(
            c,
            EPS1_GRID
                .iter()
                .try_for_each(|&e| sandwich(&sc, &planner_config(e, 0.0, inject_fault), j_star)),
        );
        eps2.record(
            c,
            EPS2_GRID
                .iter()
                .try_for_each(|&e| sandwich(&sc, &planner_config(0.0, e, inject_fault), j_star)),
        );
    }

    let mut closure = SuiteResult::new("psd_closure");
    for i in 0..count {
        let c = case_seed(seed, 3, i);
        closure.record(c, psd_closure_case(c));
    }

    VerifyReport {
        seed,
        count,
        suites: vec![monotone, oracle, eps1, eps2, closure],
    }
}
