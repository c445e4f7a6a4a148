//! Seeded random inputs for the property suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::estimation::MotionModel;
use crate::estimation::{SensorModel, TargetEstimate, TargetModel};
use crate::linalg::{Mat2, SymMat2, Vec2};
use crate::planner::{CandidateMode, PruneConfig};
use crate::scenario::Scenario;

/// Size limits for [`random_scenario`].
#[derive(Debug, Clone, Copy)]
pub struct ScenarioLimits {
    pub max_horizon: usize,
    pub max_controls: usize,
    pub max_candidates: usize,
}

impl Default for ScenarioLimits {
    fn default() -> Self {
        Self {
            max_horizon: 3,
            max_controls: 4,
            max_candidates: 3,
        }
    }
}

pub fn random_psd(rng: &mut impl Rng, lo: f64, hi: f64) -> SymMat2 {
    let l1 = rng.random_range(lo..hi);
    let l2 = rng.random_range(lo..hi);
    let th: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let (s, c) = th.sin_cos();
    Mat2::new(c, -s, s, c).congruence(SymMat2::diag(l1, l2))
}

fn random_point(rng: &mut impl Rng, half_width: f64) -> Vec2 {
    Vec2::new(
        rng.random_range(-half_width..half_width),
        rng.random_range(-half_width..half_width),
    )
}

/// A small random scenario; the same seed always yields the same scenario.
pub fn random_scenario(seed: u64, limits: ScenarioLimits) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = rng.random_range(0.5..2.0);
    let mut controls = MotionModel::axis_moves(step).controls;
    let n = rng.random_range(1..=limits.max_controls.min(4));
    controls.truncate(n);
    let mean = random_point(&mut rng, 8.0);
    // Half the scenarios pair an accurate sensor with a vague prior and
    // expansive dynamics, the regime in which the redundancy test can fire.
    let precise = rng.random_bool(0.5);
    let gain = if precise {
        rng.random_range(1.0..3.0)
    } else {
        1.0
    };
    let dynamics = Mat2::scaled_identity(gain)
        * if rng.random_bool(0.5) {
            Mat2::IDENTITY
        } else {
            Mat2::new(
                rng.random_range(0.8..1.1),
                rng.random_range(-0.2..0.2),
                rng.random_range(-0.2..0.2),
                rng.random_range(0.8..1.1),
            )
        };
    let process_noise = if rng.random_bool(0.3) {
        SymMat2::ZERO
    } else {
        random_psd(&mut rng, 0.0, 3.0)
    };
    let sensor = if precise {
        SensorModel {
            obs_matrix: Mat2::IDENTITY,
            base_var: rng.random_range(0.001..0.05),
            slope_var: rng.random_range(0.001..0.05),
            range: rng.random_range(3.0..12.0),
            ceiling: rng.random_range(0.5..2.0),
        }
    } else {
        SensorModel {
            obs_matrix: Mat2::IDENTITY,
            base_var: rng.random_range(0.1..2.0),
            slope_var: rng.random_range(0.1..2.0),
            range: rng.random_range(3.0..12.0),
            ceiling: rng.random_range(1.0..5.0),
        }
    };
    let prior = if precise {
        random_psd(&mut rng, 1.0, 60.0)
    } else {
        random_psd(&mut rng, 0.5, 6.0)
    };
    Scenario {
        robot_start: random_point(&mut rng, 5.0),
        target_estimate0: TargetEstimate::new(mean, prior),
        target_true0: mean + random_point(&mut rng, 1.0),
        motion: MotionModel {
            step_size: step,
            controls,
        },
        target_model: TargetModel {
            dynamics,
            process_noise,
        },
        sensor,
        horizon: rng.random_range(1..=limits.max_horizon),
        candidates: rng.random_range(1..=limits.max_candidates),
        candidate_mode: if rng.random_bool(0.5) {
            CandidateMode::SeededGaussian
        } else {
            CandidateMode::DeterministicQuantile
        },
        prune: PruneConfig::exact(),
        seed: rng.random(),
    }
}

/// Inputs to the Riccati monotonicity property.
#[derive(Debug, Clone, Copy)]
pub struct MonotonePair {
    pub cov_a: SymMat2,
    pub cov_b: SymMat2,
    pub s_a: f64,
    pub s_b: f64,
    pub model: TargetModel,
    pub sensor: SensorModel,
}

/// Rejection-samples a pair satisfying the monotonicity precondition:
/// `Σ_A ⪰ Σ_B`, `HΣ_AHᵀ + s_A·I ⪰ HΣ_BHᵀ + s_B·I`, noise levels within the cap.
pub fn random_monotone_pair(rng: &mut impl Rng) -> MonotonePair {
    let sensor = SensorModel {
        obs_matrix: Mat2::new(
            rng.random_range(0.5..1.5),
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
            rng.random_range(0.5..1.5),
        ),
        base_var: rng.random_range(0.1..2.0),
        slope_var: rng.random_range(0.0..1.0),
        range: 10.0,
        ceiling: rng.random_range(1.0..5.0),
    };
    let model = TargetModel {
        dynamics: Mat2::new(
            rng.random_range(-1.5..1.5),
            rng.random_range(-1.5..1.5),
            rng.random_range(-1.5..1.5),
            rng.random_range(-1.5..1.5),
        ),
        process_noise: random_psd(rng, 0.0, 1.0),
    };
    let cap = sensor.max_variance();
    let h = sensor.obs_matrix;
    loop {
        let cov_b = random_psd(rng, 0.0, 5.0);
        let cov_a = cov_b + random_psd(rng, 0.0, 5.0);
        let s_a = rng.random_range(0.0..=cap);
        let s_b = rng.random_range(0.0..=cap);
        let lhs = h.congruence(cov_a).add_identity(s_a);
        let rhs = h.congruence(cov_b).add_identity(s_b);
        if crate::estimation::psd_dominates(lhs, rhs, 0.0)
            && crate::estimation::psd_dominates(cov_a, cov_b, 0.0)
        {
            return MonotonePair {
                cov_a,
                cov_b,
                s_a,
                s_b,
                model,
                sensor,
            };
        }
    }
}
