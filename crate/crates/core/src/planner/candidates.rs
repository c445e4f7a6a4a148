//! Finite sets of candidate measurements drawn from the predicted measurement
//! distribution `N(H·mean, H·Σ·Hᵀ + Σ_w)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::estimation::{
    noise_variance, EstimationError, Result, SensorModel, TargetEstimate, MIN_INNOVATION_DET,
};
use crate::linalg::{SymMat2, Vec2};

/// Largest offset of a quantile candidate, in standard deviations.
pub const MAX_SIGMA: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateMode {
    DeterministicQuantile,
    SeededGaussian,
}

impl CandidateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CandidateMode::DeterministicQuantile => "deterministic_quantile",
            CandidateMode::SeededGaussian => "seeded_gaussian",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "deterministic_quantile" => Some(Self::DeterministicQuantile),
            "seeded_gaussian" => Some(Self::SeededGaussian),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub points: Vec<Vec2>,
    pub mode: CandidateMode,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Standard-normal quantiles at the midpoints `(2i−1)/(2k)`, clipped to ±3.
pub fn quantile_midpoints(k: usize) -> Vec<f64> {
    let normal = Normal::standard();
    (1..=k)
        .map(|i| {
            let p = (2 * i - 1) as f64 / (2 * k) as f64;
            // inverse_cdf(0.5) is not exactly zero in floating point
            let z = if 2 * i - 1 == k {
                0.0
            } else {
                normal.inverse_cdf(p)
            };
            z.clamp(-MAX_SIGMA, MAX_SIGMA)
        })
        .collect()
}

/// Predicted measurement mean and innovation covariance at `robot`.
pub fn predicted_measurement(
    est: &TargetEstimate,
    sensor: &SensorModel,
    robot: Vec2,
) -> (Vec2, SymMat2) {
    let h = sensor.obs_matrix_at(robot);
    let w = noise_variance(robot, est.mean, sensor);
    (h.mul_vec(est.mean), h.congruence(est.cov).add_identity(w))
}

pub fn generate_candidates(
    est: &TargetEstimate,
    sensor: &SensorModel,
    robot: Vec2,
    k: usize,
    mode: CandidateMode,
    seed: u64,
) -> Result<CandidateSet> {
    assert!(k >= 1, "candidate count must be positive");
    let (mean, s) = predicted_measurement(est, sensor, robot);
    let det = s.det();
    if !(det >= MIN_INNOVATION_DET) {
        return Err(EstimationError::SingularInnovation { det });
    }
    let points = if k == 1 {
        vec![mean]
    } else {
        match mode {
            CandidateMode::DeterministicQuantile => {
                let axes = s.eigen();
                quantile_midpoints(k)
                    .into_iter()
                    .enumerate()
                    .map(|(i, z)| {
                        let (lambda, dir) = axes[i % 2];
                        mean + (z * lambda.max(0.0).sqrt()) * dir
                    })
                    .collect()
            }
            CandidateMode::SeededGaussian => {
                let l = s.sqrt_factor();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..k)
                    .map(|_| {
                        let n = Vec2::new(
                            StandardNormal.sample(&mut rng),
                            StandardNormal.sample(&mut rng),
                        );
                        mean + l.mul_vec(n)
                    })
                    .collect()
            }
        }
    };
    Ok(CandidateSet { points, mode })
}

/// SplitMix64 finaliser, used to derive per-node seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of a child path given the parent's hash and the branch index taken.
pub fn child_path_hash(parent: u64, branch: usize) -> u64 {
    mix64(parent ^ mix64(branch as u64 + 1))
}

/// Seed for the candidate set generated at the node with `path_hash`.
pub fn candidate_seed(scenario_seed: u64, path_hash: u64) -> u64 {
    mix64(scenario_seed.wrapping_mul(0xA24B_AED4_963E_E407) ^ path_hash)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat2;

    fn isotropic_setup(sigma2: f64) -> (TargetEstimate, SensorModel) {
        // H = I, Σ = 0 → S = w·I with w = base_var at distance zero.
        let est = TargetEstimate::new(Vec2::new(1.0, 2.0), SymMat2::ZERO);
        let sensor = SensorModel {
            obs_matrix: Mat2::IDENTITY,
            base_var: sigma2,
            slope_var: 0.0,
            range: 10.0,
            ceiling: 5.0,
        };
        (est, sensor)
    }

    #[test]
    fn single_candidate_is_mean() {
        let (est, sensor) = isotropic_setup(2.0);
        for mode in [
            CandidateMode::DeterministicQuantile,
            CandidateMode::SeededGaussian,
        ] {
            let c = generate_candidates(&est, &sensor, est.mean, 1, mode, 11).unwrap();
            assert_eq!(c.points, vec![est.mean]);
        }
    }

    #[test]
    fn five_quantiles_match_table() {
        // Φ⁻¹(0.1), Φ⁻¹(0.3) from standard normal tables.
        let z = quantile_midpoints(5);
        let table = [
            -1.2815515655446004,
            -0.5244005127080407,
            0.0,
            0.5244005127080407,
            1.2815515655446004,
        ];
        for (a, b) in z.iter().zip(table) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn quantile_set_is_symmetric_and_bounded() {
        let sigma2 = 4.0;
        let (est, sensor) = isotropic_setup(sigma2);
        let c = generate_candidates(
            &est,
            &sensor,
            est.mean,
            5,
            CandidateMode::DeterministicQuantile,
            0,
        )
        .unwrap();
        let sigma = sigma2.sqrt();
        let offsets: Vec<Vec2> = c.points.iter().map(|p| *p - est.mean).collect();
        let expected = [
            Vec2::new(-1.2815515655446004 * sigma, 0.0),
            Vec2::new(0.0, -0.5244005127080407 * sigma),
            Vec2::ZERO,
            Vec2::new(0.0, 0.5244005127080407 * sigma),
            Vec2::new(1.2815515655446004 * sigma, 0.0),
        ];
        for (o, e) in offsets.iter().zip(expected) {
            assert!((o.x - e.x).abs() < 1e-9 && (o.y - e.y).abs() < 1e-9);
        }
        for (i, o) in offsets.iter().enumerate() {
            let mirror = offsets[4 - i];
            assert!((o.x + mirror.x).abs() < 1e-12 && (o.y + mirror.y).abs() < 1e-12);
            assert!(o.norm() <= 3.0 * sigma);
        }
    }

    #[test]
    fn many_quantiles_are_clipped() {
        let z = quantile_midpoints(1000);
        assert!(z.iter().all(|v| v.abs() <= MAX_SIGMA));
        assert_eq!(z[0], -MAX_SIGMA);
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let (est, sensor) = isotropic_setup(1.0);
        let a = generate_candidates(
            &est,
            &sensor,
            est.mean,
            5,
            CandidateMode::SeededGaussian,
            42,
        )
        .unwrap();
        let b = generate_candidates(
            &est,
            &sensor,
            est.mean,
            5,
            CandidateMode::SeededGaussian,
            42,
        )
        .unwrap();
        let c = generate_candidates(
            &est,
            &sensor,
            est.mean,
            5,
            CandidateMode::SeededGaussian,
            43,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn singular_innovation_propagates() {
        let (est, mut sensor) = isotropic_setup(0.0);
        sensor.base_var = 0.0;
        let r = generate_candidates(
            &est,
            &sensor,
            est.mean,
            3,
            CandidateMode::DeterministicQuantile,
            0,
        );
        assert!(matches!(r, Err(EstimationError::SingularInnovation { .. })));
    }

    #[test]
    fn mode_strings_round_trip() {
        for m in [
            CandidateMode::DeterministicQuantile,
            CandidateMode::SeededGaussian,
        ] {
            assert_eq!(CandidateMode::parse(m.as_str()), Some(m));
        }
        assert_eq!(CandidateMode::parse("uniform"), None);
    }
}
