//! Robot and target models, the distance-dependent measurement noise, and the
//! Kalman covariance (Riccati) and mean recursions.
//!
//! The filter is kept in one-step-predictor form: a [`TargetEstimate`] is the
//! prior for the target position at the time the next measurement is taken.
//! One update consumes a measurement and predicts through the target dynamics,
//! so the covariance recursion is exactly
//!
//! ```text
//! ρ(Σ) = CΣCᵀ − CΣHᵀ(HΣHᵀ + Σ_w)⁻¹HΣCᵀ + Σ_v
//! ```
//!
//! with `Σ_w = w·I` and `w` from [`noise_variance`] evaluated at the
//! *estimated* target position.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Mat2, SymMat2, Vec2, TOL_PSD};

/// Innovation matrices with a determinant below this are treated as singular.
pub const MIN_INNOVATION_DET: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error("singular innovation matrix (det = {det:e})")]
    SingularInnovation { det: f64 },
    #[error("control ({x}, {y}) is not in the control set")]
    ControlNotInSet { x: f64, y: f64 },
    #[error("monotonicity precondition violated: {0}")]
    MonotonePrecondition(String),
}

pub type Result<T> = std::result::Result<T, EstimationError>;

/// Finite action set of the robot, `X_r(t+1) = X_r(t) + u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionModel {
    pub step_size: f64,
    pub controls: Vec<Vec2>,
}

impl MotionModel {
    /// The four axis moves `{[+e,0], [−e,0], [0,+e], [0,−e]}`.
    pub fn axis_moves(step_size: f64) -> Self {
        let e = step_size;
        Self {
            step_size,
            controls: vec![
                Vec2::new(e, 0.0),
                Vec2::new(-e, 0.0),
                Vec2::new(0.0, e),
                Vec2::new(0.0, -e),
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn apply(&self, state: Vec2, u: Vec2) -> Result<Vec2> {
        apply_control(state, u, self)
    }

    /// Applies the `index`-th control; panics if out of range.
    pub fn apply_index(&self, state: Vec2, index: usize) -> Vec2 {
        state + self.controls[index]
    }
}

/// Linear target dynamics `X_o(t+1) = C X_o(t) + v`, `v ~ N(0, Σ_v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetModel {
    pub dynamics: Mat2,
    pub process_noise: SymMat2,
}

impl TargetModel {
    pub fn stationary() -> Self {
        Self {
            dynamics: Mat2::IDENTITY,
            process_noise: SymMat2::ZERO,
        }
    }
}

/// Position sensor with noise variance growing linearly with range up to a cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub obs_matrix: Mat2,
    /// δ₁² (m²).
    pub base_var: f64,
    /// δ₂² (m²).
    pub slope_var: f64,
    /// 𝓑, the distance beyond which the noise saturates (m).
    pub range: f64,
    /// 𝒞, the saturated value of the distance term.
    pub ceiling: f64,
}

impl SensorModel {
    /// Observation matrix used when the robot is at `robot`. Constant for now;
    /// this is the hook for position-dependent `H(X_r)`.
    pub fn obs_matrix_at(&self, _robot: Vec2) -> Mat2 {
        self.obs_matrix
    }

    /// Largest variance the sensor can produce, `δ₁² + δ₂²𝒞`.
    pub fn max_variance(&self) -> f64 {
        self.base_var + self.slope_var * self.ceiling
    }
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            obs_matrix: Mat2::IDENTITY,
            base_var: 1.0,
            slope_var: 1.0,
            range: 10.0,
            ceiling: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetEstimate {
    pub mean: Vec2,
    pub cov: SymMat2,
}

impl TargetEstimate {
    pub fn new(mean: Vec2, cov: SymMat2) -> Self {
        Self { mean, cov }
    }
}

pub fn apply_control(state: Vec2, u: Vec2, motion: &MotionModel) -> Result<Vec2> {
    if !motion.controls.contains(&u) {
        return Err(EstimationError::ControlNotInSet { x: u.x, y: u.y });
    }
    Ok(state + u)
}

/// Measurement noise variance `δ₁² + δ₂²·d` with `d = 𝒞·‖r − o‖/𝓑`, capped at `𝒞`.
pub fn noise_variance(robot: Vec2, target: Vec2, sensor: &SensorModel) -> f64 {
    let dist = robot.distance(target);
    let d = if dist > sensor.range {
        sensor.ceiling
    } else {
        sensor.ceiling * dist / sensor.range
    };
    sensor.base_var + sensor.slope_var * d
}

fn innovation_inverse(cov: SymMat2, h: Mat2, noise_var: f64) -> Result<SymMat2> {
    let s = h.congruence(cov).add_identity(noise_var);
    let det = s.det();
    if !(det >= MIN_INNOVATION_DET) {
        return Err(EstimationError::SingularInnovation { det });
    }
    Ok(SymMat2::new(s.a22 / det, -s.a12 / det, s.a11 / det))
}

/// One Riccati step with an explicit scalar noise variance `Σ_w = noise_var·I`.
pub fn riccati_with_noise(
    cov: SymMat2,
    model: &TargetModel,
    h: Mat2,
    noise_var: f64,
) -> Result<SymMat2> {
    let s_inv = innovation_inverse(cov, h, noise_var)?;
    let c = model.dynamics;
    let cross = c * cov.to_mat() * h.transpose();
    Ok(c.congruence(cov) - cross.congruence(s_inv) + model.process_noise)
}

/// The Riccati map with the noise evaluated at the estimated target position.
pub fn riccati_step(
    cov: SymMat2,
    target_model: &TargetModel,
    sensor: &SensorModel,
    robot: Vec2,
    est_target: Vec2,
) -> Result<SymMat2> {
    let w = noise_variance(robot, est_target, sensor);
    riccati_with_noise(cov, target_model, sensor.obs_matrix_at(robot), w)
}

/// Filter gain `K = ΣHᵀ(HΣHᵀ + w·I)⁻¹`.
pub fn kalman_gain(cov: SymMat2, h: Mat2, noise_var: f64) -> Result<Mat2> {
    let s_inv = innovation_inverse(cov, h, noise_var)?;
    Ok(cov.to_mat() * h.transpose() * s_inv.to_mat())
}

/// Closed-loop transition `F = C − C·K·H` for the gain at `cov`.
pub fn closed_loop_transition(
    cov: SymMat2,
    model: &TargetModel,
    h: Mat2,
    noise_var: f64,
) -> Result<Mat2> {
    let k = kalman_gain(cov, h, noise_var)?;
    let c = model.dynamics;
    Ok(c - c * k * h)
}

/// Measurement update followed by prediction. The covariance is exactly the
/// [`riccati_step`] output on the same inputs.
pub fn kf_mean_update(
    est: &TargetEstimate,
    z: Vec2,
    target_model: &TargetModel,
    sensor: &SensorModel,
    robot: Vec2,
) -> Result<TargetEstimate> {
    let h = sensor.obs_matrix_at(robot);
    let w = noise_variance(robot, est.mean, sensor);
    let gain = kalman_gain(est.cov, h, w)?;
    let innovation = z - h.mul_vec(est.mean);
    let corrected = est.mean + gain.mul_vec(innovation);
    let mean = target_model.dynamics.mul_vec(corrected);
    let cov = riccati_step(est.cov, target_model, sensor, robot, est.mean)?;
    Ok(TargetEstimate { mean, cov })
}

/// `lhs + slack·I ⪰ rhs` within [`TOL_PSD`].
pub fn psd_dominates(lhs: SymMat2, rhs: SymMat2, slack: f64) -> bool {
    (lhs.add_identity(slack) - rhs).min_eigenvalue() >= -TOL_PSD
}

/// Checks whether the Riccati map preserves the order of two covariances whose
/// noise levels are `s_a`, `s_b`.
///
/// Inputs must satisfy `cov_a ⪰ cov_b`, `H·cov_a·Hᵀ + s_a·I ⪰ H·cov_b·Hᵀ + s_b·I`
/// and `s_a, s_b ∈ [0, δ₁² + δ₂²𝒞]`; anything else is rejected. Note that the
/// precondition does not imply the conclusion when `s_a < s_b` (for example
/// scalar `cov_a = 10, s_a = 0.1` against `cov_b = 1, s_b = 5`).
pub fn check_riccati_monotone(
    cov_a: SymMat2,
    cov_b: SymMat2,
    s_a: f64,
    s_b: f64,
    model: &TargetModel,
    sensor: &SensorModel,
) -> Result<bool> {
    let cap = sensor.max_variance();
    for (name, s) in [("s_a", s_a), ("s_b", s_b)] {
        if !(-TOL_PSD..=cap + TOL_PSD).contains(&s) {
            return Err(EstimationError::MonotonePrecondition(format!(
                "{name} = {s} outside [0, {cap}]"
            )));
        }
    }
    if !psd_dominates(cov_a, cov_b, 0.0) {
        return Err(EstimationError::MonotonePrecondition(
            "cov_a is not ⪰ cov_b".into(),
        ));
    }
    let h = sensor.obs_matrix;
    let lhs = h.congruence(cov_a).add_identity(s_a);
    let rhs = h.congruence(cov_b).add_identity(s_b);
    if !psd_dominates(lhs, rhs, 0.0) {
        return Err(EstimationError::MonotonePrecondition(
            "H·cov_a·Hᵀ + s_a·I is not ⪰ H·cov_b·Hᵀ + s_b·I".into(),
        ));
    }
    let rho_a = riccati_with_noise(cov_a, model, h, s_a)?;
    let rho_b = riccati_with_noise(cov_b, model, h, s_b)?;
    Ok(psd_dominates(rho_a, rho_b, 0.0))
}
