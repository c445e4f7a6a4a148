//! Scenario description and its TOML file format.
//!
//! Only `schema_version`, `robot.start` and `target.mean` are required; every
//! other key falls back to the defaults of [`Scenario::default`]. Every
//! validation failure carries a stable error code and, where the offending key
//! is present in the file, its line number.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::estimation::{MotionModel, SensorModel, TargetEstimate, TargetModel};
use crate::linalg::{Mat2, SymMat2, Vec2, TOL_PSD};
use crate::planner::{CandidateMode, DominationMode, PruneConfig};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub robot_start: Vec2,
    pub target_estimate0: TargetEstimate,
    /// True initial target position; only the simulator reads it.
    pub target_true0: Vec2,
    pub motion: MotionModel,
    pub target_model: TargetModel,
    pub sensor: SensorModel,
    pub horizon: usize,
    pub candidates: usize,
    pub candidate_mode: CandidateMode,
    pub prune: PruneConfig,
    pub seed: u64,
}

impl Default for Scenario {
    /// Four axis moves of 1 m, five Gaussian candidates, two-step horizon,
    /// a slowly diffusing target about 7 m away.
    fn default() -> Self {
        let mean = Vec2::new(6.0, 4.0);
        Self {
            robot_start: Vec2::ZERO,
            target_estimate0: TargetEstimate::new(mean, SymMat2::scaled_identity(5.0)),
            target_true0: mean,
            motion: MotionModel::axis_moves(1.0),
            target_model: TargetModel {
                dynamics: Mat2::IDENTITY,
                process_noise: SymMat2::scaled_identity(0.1),
            },
            sensor: SensorModel::default(),
            horizon: 2,
            candidates: 5,
            candidate_mode: CandidateMode::SeededGaussian,
            prune: PruneConfig::exact(),
            seed: 0,
        }
    }
}

impl Scenario {
    /// Short stable identifier: SHA-256 of the canonical TOML form.
    pub fn digest(&self) -> String {
        let text = self.to_toml_string();
        let hash = Sha256::digest(text.as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_prune(mut self, prune: PruneConfig) -> Self {
        self.prune = prune;
        self
    }

    /// Checks every model invariant; used after parsing and available to
    /// programmatic callers.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        validate_scenario(self, &|_, _| None)
    }

    pub fn to_toml_string(&self) -> String {
        let raw = RawScenario::from(self);
        toml::to_string(&raw).expect("scenario serializes to TOML")
    }

    pub fn save(&self, path: &Path) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_toml_string()).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            reason: source.to_string(),
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("[E001] cannot read {}: {reason}", path.display())]
    Io { path: PathBuf, reason: String },
    #[error("[E002] {}: {message}", LineRef(*line))]
    Parse {
        line: Option<usize>,
        message: String,
    },
    #[error("[E003] {}: unsupported schema_version {found} (expected {SCENARIO_SCHEMA_VERSION})", LineRef(*line))]
    UnsupportedSchema { line: Option<usize>, found: i64 },
    #[error("[E004] {}: missing required field `{field}`", LineRef(*line))]
    MissingField {
        field: &'static str,
        line: Option<usize>,
    },
    #[error("[E005] {}: `{field}` must be finite", LineRef(*line))]
    NonFinite {
        field: &'static str,
        line: Option<usize>,
    },
    #[error("[E006] {}: `{field}` must be symmetric", LineRef(*line))]
    NotSymmetric {
        field: &'static str,
        line: Option<usize>,
    },
    #[error("[E007] {}: `{field}` is not positive semidefinite (min eigenvalue {min_eig})", LineRef(*line))]
    NotPsd {
        field: &'static str,
        line: Option<usize>,
        min_eig: f64,
    },
    #[error("[E008] {}: sensor.range must be > 0 (got {value})", LineRef(*line))]
    NonPositiveRange { line: Option<usize>, value: f64 },
    #[error("[E009] {}: sensor.ceiling must be > 0 (got {value})", LineRef(*line))]
    NonPositiveCeiling { line: Option<usize>, value: f64 },
    #[error("[E010] {}: `{field}` must be >= 0 (got {value})", LineRef(*line))]
    NegativeVariance {
        field: &'static str,
        line: Option<usize>,
        value: f64,
    },
    #[error("[E011] {}: unknown {field} `{value}`", LineRef(*line))]
    UnknownMode {
        field: &'static str,
        value: String,
        line: Option<usize>,
    },
    #[error("[E012] {}: horizon must be >= 1", LineRef(*line))]
    InvalidHorizon { line: Option<usize> },
    #[error("[E013] {}: candidates must be >= 1", LineRef(*line))]
    InvalidCandidateCount { line: Option<usize> },
    #[error("[E014] {}: motion.controls must not be empty", LineRef(*line))]
    EmptyControlSet { line: Option<usize> },
    #[error("[E015] {}: `{field}` must be >= 0 (got {value})", LineRef(*line))]
    NegativeEpsilon {
        field: &'static str,
        line: Option<usize>,
        value: f64,
    },
    #[error("[E016] {}: prune.grid_resolution must be >= 1", LineRef(*line))]
    InvalidGridResolution { line: Option<usize> },
    #[error("[E017] {}: motion.step_size must be > 0 (got {value})", LineRef(*line))]
    NonPositiveStep { line: Option<usize>, value: f64 },
}

impl ScenarioError {
    pub fn code(&self) -> &'static str {
        match self {
            ScenarioError::Io { .. } => "E001",
            ScenarioError::Parse { .. } => "E002",
            ScenarioError::UnsupportedSchema { .. } => "E003",
            ScenarioError::MissingField { .. } => "E004",
            ScenarioError::NonFinite { .. } => "E005",
            ScenarioError::NotSymmetric { .. } => "E006",
            ScenarioError::NotPsd { .. } => "E007",
            ScenarioError::NonPositiveRange { .. } => "E008",
            ScenarioError::NonPositiveCeiling { .. } => "E009",
            ScenarioError::NegativeVariance { .. } => "E010",
            ScenarioError::UnknownMode { .. } => "E011",
            ScenarioError::InvalidHorizon { .. } => "E012",
            ScenarioError::InvalidCandidateCount { .. } => "E013",
            ScenarioError::EmptyControlSet { .. } => "E014",
            ScenarioError::NegativeEpsilon { .. } => "E015",
            ScenarioError::InvalidGridResolution { .. } => "E016",
            ScenarioError::NonPositiveStep { .. } => "E017",
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            ScenarioError::Io { .. } => None,
            ScenarioError::Parse { line, .. }
            | ScenarioError::UnsupportedSchema { line, .. }
            | ScenarioError::MissingField { line, .. }
            | ScenarioError::NonFinite { line, .. }
            | ScenarioError::NotSymmetric { line, .. }
            | ScenarioError::NotPsd { line, .. }
            | ScenarioError::NonPositiveRange { line, .. }
            | ScenarioError::NonPositiveCeiling { line, .. }
            | ScenarioError::NegativeVariance { line, .. }
            | ScenarioError::UnknownMode { line, .. }
            | ScenarioError::InvalidHorizon { line }
            | ScenarioError::InvalidCandidateCount { line }
            | ScenarioError::EmptyControlSet { line }
            | ScenarioError::NegativeEpsilon { line, .. }
            | ScenarioError::InvalidGridResolution { line }
            | ScenarioError::NonPositiveStep { line, .. } => *line,
        }
    }
}

struct LineRef(Option<usize>);

impl fmt::Display for LineRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(l) => write!(f, "line {l}"),
            None => write!(f, "scenario"),
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: Option<i64>,
    seed: Option<u64>,
    horizon: Option<i64>,
    candidates: Option<i64>,
    candidate_mode: Option<String>,
    robot: Option<RawRobot>,
    target: Option<RawTarget>,
    motion: Option<RawMotion>,
    sensor: Option<RawSensor>,
    prune: Option<RawPrune>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRobot {
    start: Option<[f64; 2]>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    mean: Option<[f64; 2]>,
    covariance: Option<[[f64; 2]; 2]>,
    true_position: Option<[f64; 2]>,
    dynamics: Option<[[f64; 2]; 2]>,
    process_noise: Option<[[f64; 2]; 2]>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMotion {
    step_size: Option<f64>,
    controls: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensor {
    obs_matrix: Option<[[f64; 2]; 2]>,
    base_var: Option<f64>,
    slope_var: Option<f64>,
    range: Option<f64>,
    ceiling: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrune {
    eps1: Option<f64>,
    eps2: Option<f64>,
    alpha: Option<bool>,
    redundancy: Option<bool>,
    domination: Option<String>,
    grid_resolution: Option<i64>,
}

fn sym_rows(m: SymMat2) -> [[f64; 2]; 2] {
    [[m.a11, m.a12], [m.a12, m.a22]]
}

impl From<&Scenario> for RawScenario {
    fn from(s: &Scenario) -> Self {
        let (domination, grid_resolution) = match s.prune.domination {
            DominationMode::Pairwise => ("pairwise", None),
            DominationMode::SimplexGrid { resolution } => ("simplex_grid", Some(resolution as i64)),
        };
        RawScenario {
            schema_version: Some(SCENARIO_SCHEMA_VERSION as i64),
            seed: Some(s.seed),
            horizon: Some(s.horizon as i64),
            candidates: Some(s.candidates as i64),
            candidate_mode: Some(s.candidate_mode.as_str().to_string()),
            robot: Some(RawRobot {
                start: Some(s.robot_start.into()),
            }),
            target: Some(RawTarget {
                mean: Some(s.target_estimate0.mean.into()),
                covariance: Some(sym_rows(s.target_estimate0.cov)),
                true_position: Some(s.target_true0.into()),
                dynamics: Some(s.target_model.dynamics.to_rows()),
                process_noise: Some(sym_rows(s.target_model.process_noise)),
            }),
            motion: Some(RawMotion {
                step_size: Some(s.motion.step_size),
                controls: Some(s.motion.controls.iter().map(|&c| c.into()).collect()),
            }),
            sensor: Some(RawSensor {
                obs_matrix: Some(s.sensor.obs_matrix.to_rows()),
                base_var: Some(s.sensor.base_var),
                slope_var: Some(s.sensor.slope_var),
                range: Some(s.sensor.range),
                ceiling: Some(s.sensor.ceiling),
            }),
            prune: Some(RawPrune {
                eps1: Some(s.prune.eps1),
                eps2: Some(s.prune.eps2),
                alpha: Some(s.prune.alpha_enabled),
                redundancy: Some(s.prune.redundancy_enabled),
                domination: Some(domination.to_string()),
                grid_resolution,
            }),
        }
    }
}

/// Line (1-based) of `key = ...` inside `[table]` (or the top level).
fn locate(src: &str, table: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            current = Some(t.trim_matches(|c| c == '[' || c == ']').trim().to_string());
            continue;
        }
        if current.as_deref() == table {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    if key.is_empty() {
        return None;
    }
    // fall back to the table header
    table.and_then(|tb| {
        src.lines()
            .position(|l| {
                l.trim().trim_matches(|c| c == '[' || c == ']').trim() == tb
                    && l.trim().starts_with('[')
            })
            .map(|i| i + 1)
    })
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

type Locator<'a> = dyn Fn(Option<&str>, &str) -> Option<usize> + 'a;

fn split_field(field: &str) -> (Option<&str>, &str) {
    match field.split_once('.') {
        Some((t, k)) => (Some(t), k),
        None => (None, field),
    }
}

fn symmetric(
    rows: [[f64; 2]; 2],
    field: &'static str,
    loc: &Locator<'_>,
) -> Result<SymMat2, ScenarioError> {
    let (t, k) = split_field(field);
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ScenarioError::NonFinite {
            field,
            line: loc(t, k),
        });
    }
    if rows[0][1] != rows[1][0] {
        return Err(ScenarioError::NotSymmetric {
            field,
            line: loc(t, k),
        });
    }
    Ok(SymMat2::new(rows[0][0], rows[0][1], rows[1][1]))
}

fn finite_vec(v: [f64; 2], field: &'static str, loc: &Locator<'_>) -> Result<Vec2, ScenarioError> {
    let (t, k) = split_field(field);
    let v = Vec2::from(v);
    if !v.is_finite() {
        return Err(ScenarioError::NonFinite {
            field,
            line: loc(t, k),
        });
    }
    Ok(v)
}

fn finite_mat(
    rows: [[f64; 2]; 2],
    field: &'static str,
    loc: &Locator<'_>,
) -> Result<Mat2, ScenarioError> {
    let (t, k) = split_field(field);
    let m = Mat2::from_rows(rows);
    if !m.is_finite() {
        return Err(ScenarioError::NonFinite {
            field,
            line: loc(t, k),
        });
    }
    Ok(m)
}

fn validate_scenario(s: &Scenario, loc: &Locator<'_>) -> Result<(), ScenarioError> {
    let finite_scalar = |v: f64, field: &'static str| -> Result<(), ScenarioError> {
        let (t, k) = split_field(field);
        if v.is_finite() {
            Ok(())
        } else {
            Err(ScenarioError::NonFinite {
                field,
                line: loc(t, k),
            })
        }
    };
    for (v, f) in [
        (s.robot_start, "robot.start"),
        (s.target_estimate0.mean, "target.mean"),
        (s.target_true0, "target.true_position"),
    ] {
        finite_vec(v.into(), f, loc)?;
    }
    for (m, f) in [
        (s.target_estimate0.cov, "target.covariance"),
        (s.target_model.process_noise, "target.process_noise"),
    ] {
        if !m.is_finite() {
            return Err(ScenarioError::NonFinite {
                field: f,
                line: loc(Some("target"), split_field(f).1),
            });
        }
        let min_eig = m.min_eigenvalue();
        if min_eig < -TOL_PSD {
            return Err(ScenarioError::NotPsd {
                field: f,
                line: loc(Some("target"), split_field(f).1),
                min_eig,
            });
        }
    }
    finite_mat(s.target_model.dynamics.to_rows(), "target.dynamics", loc)?;
    finite_mat(s.sensor.obs_matrix.to_rows(), "sensor.obs_matrix", loc)?;

    finite_scalar(s.motion.step_size, "motion.step_size")?;
    if s.motion.step_size <= 0.0 {
        return Err(ScenarioError::NonPositiveStep {
            line: loc(Some("motion"), "step_size"),
            value: s.motion.step_size,
        });
    }
    if s.motion.controls.is_empty() {
        return Err(ScenarioError::EmptyControlSet {
            line: loc(Some("motion"), "controls"),
        });
    }
    for c in &s.motion.controls {
        finite_vec((*c).into(), "motion.controls", loc)?;
    }

    for (v, f) in [
        (s.sensor.base_var, "sensor.base_var"),
        (s.sensor.slope_var, "sensor.slope_var"),
        (s.sensor.range, "sensor.range"),
        (s.sensor.ceiling, "sensor.ceiling"),
        (s.prune.eps1, "prune.eps1"),
        (s.prune.eps2, "prune.eps2"),
    ] {
        finite_scalar(v, f)?;
    }
    for (v, f) in [
        (s.sensor.base_var, "sensor.base_var"),
        (s.sensor.slope_var, "sensor.slope_var"),
    ] {
        if v < 0.0 {
            return Err(ScenarioError::NegativeVariance {
                field: f,
                line: loc(Some("sensor"), split_field(f).1),
                value: v,
            });
        }
    }
    if s.sensor.range <= 0.0 {
        return Err(ScenarioError::NonPositiveRange {
            line: loc(Some("sensor"), "range"),
            value: s.sensor.range,
        });
    }
    if s.sensor.ceiling <= 0.0 {
        return Err(ScenarioError::NonPositiveCeiling {
            line: loc(Some("sensor"), "ceiling"),
            value: s.sensor.ceiling,
        });
    }
    if s.horizon < 1 {
        return Err(ScenarioError::InvalidHorizon {
            line: loc(None, "horizon"),
        });
    }
    if s.candidates < 1 {
        return Err(ScenarioError::InvalidCandidateCount {
            line: loc(None, "candidates"),
        });
    }
    for (v, f) in [(s.prune.eps1, "prune.eps1"), (s.prune.eps2, "prune.eps2")] {
        if v < 0.0 {
            return Err(ScenarioError::NegativeEpsilon {
                field: f,
                line: loc(Some("prune"), split_field(f).1),
                value: v,
            });
        }
    }
    if let DominationMode::SimplexGrid { resolution } = s.prune.domination {
        if resolution < 1 {
            return Err(ScenarioError::InvalidGridResolution {
                line: loc(Some("prune"), "grid_resolution"),
            });
        }
    }
    Ok(())
}

/// Parses and validates a scenario document.
pub fn parse_scenario(src: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(src).map_err(|e| ScenarioError::Parse {
        line: e.span().map(|s| line_of_offset(src, s.start)),
        message: e.message().to_string(),
    })?;
    let loc = |t: Option<&str>, k: &str| locate(src, t, k);
    let d = Scenario::default();

    let version = raw.schema_version.ok_or(ScenarioError::MissingField {
        field: "schema_version",
        line: None,
    })?;
    if version != SCENARIO_SCHEMA_VERSION as i64 {
        return Err(ScenarioError::UnsupportedSchema {
            line: loc(None, "schema_version"),
            found: version,
        });
    }

    let robot = raw.robot.unwrap_or_default();
    let robot_start = robot.start.ok_or(ScenarioError::MissingField {
        field: "robot.start",
        line: loc(Some("robot"), ""),
    })?;
    let robot_start = finite_vec(robot_start, "robot.start", &loc)?;

    let target = raw.target.unwrap_or_default();
    let mean = target.mean.ok_or(ScenarioError::MissingField {
        field: "target.mean",
        line: loc(Some("target"), ""),
    })?;
    let mean = finite_vec(mean, "target.mean", &loc)?;
    let cov = match target.covariance {
        Some(rows) => symmetric(rows, "target.covariance", &loc)?,
        None => d.target_estimate0.cov,
    };
    let true_pos = match target.true_position {
        Some(v) => finite_vec(v, "target.true_position", &loc)?,
        None => mean,
    };
    let dynamics = match target.dynamics {
        Some(rows) => finite_mat(rows, "target.dynamics", &loc)?,
        None => d.target_model.dynamics,
    };
    let process_noise = match target.process_noise {
        Some(rows) => symmetric(rows, "target.process_noise", &loc)?,
        None => d.target_model.process_noise,
    };

    let motion_raw = raw.motion.unwrap_or_default();
    let step_size = motion_raw.step_size.unwrap_or(d.motion.step_size);
    let motion = match motion_raw.controls {
        Some(cs) => MotionModel {
            step_size,
            controls: cs.into_iter().map(Vec2::from).collect(),
        },
        None => MotionModel::axis_moves(step_size),
    };

    let sensor_raw = raw.sensor.unwrap_or_default();
    let sensor = SensorModel {
        obs_matrix: match sensor_raw.obs_matrix {
            Some(rows) => finite_mat(rows, "sensor.obs_matrix", &loc)?,
            None => d.sensor.obs_matrix,
        },
        base_var: sensor_raw.base_var.unwrap_or(d.sensor.base_var),
        slope_var: sensor_raw.slope_var.unwrap_or(d.sensor.slope_var),
        range: sensor_raw.range.unwrap_or(d.sensor.range),
        ceiling: sensor_raw.ceiling.unwrap_or(d.sensor.ceiling),
    };

    let horizon = raw.horizon.unwrap_or(d.horizon as i64);
    if horizon < 1 {
        return Err(ScenarioError::InvalidHorizon {
            line: loc(None, "horizon"),
        });
    }
    let candidates = raw.candidates.unwrap_or(d.candidates as i64);
    if candidates < 1 {
        return Err(ScenarioError::InvalidCandidateCount {
            line: loc(None, "candidates"),
        });
    }
    let candidate_mode = match raw.candidate_mode {
        Some(m) => CandidateMode::parse(&m).ok_or_else(|| ScenarioError::UnknownMode {
            field: "candidate_mode",
            value: m.clone(),
            line: loc(None, "candidate_mode"),
        })?,
        None => d.candidate_mode,
    };

    let prune_raw = raw.prune.unwrap_or_default();
    let domination = match prune_raw.domination.as_deref() {
        None | Some("pairwise") => DominationMode::Pairwise,
        Some("simplex_grid") => {
            let r = prune_raw.grid_resolution.unwrap_or(10);
            if r < 1 || r > u32::MAX as i64 {
                return Err(ScenarioError::InvalidGridResolution {
                    line: loc(Some("prune"), "grid_resolution"),
                });
            }
            DominationMode::SimplexGrid {
                resolution: r as u32,
            }
        }
        Some(other) => {
            return Err(ScenarioError::UnknownMode {
                field: "prune.domination",
                value: other.to_string(),
                line: loc(Some("prune"), "domination"),
            })
        }
    };
    let prune = PruneConfig {
        eps1: prune_raw.eps1.unwrap_or(0.0),
        eps2: prune_raw.eps2.unwrap_or(0.0),
        domination,
        alpha_enabled: prune_raw.alpha.unwrap_or(true),
        redundancy_enabled: prune_raw.redundancy.unwrap_or(true),
        fault_flip_noise_term: false,
    };

    let scenario = Scenario {
        robot_start,
        target_estimate0: TargetEstimate::new(mean, cov),
        target_true0: true_pos,
        motion,
        target_model: TargetModel {
            dynamics,
            process_noise,
        },
        sensor,
        horizon: horizon as usize,
        candidates: candidates as usize,
        candidate_mode,
        prune,
        seed: raw.seed.unwrap_or(d.seed),
    };
    validate_scenario(&scenario, &loc)?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let src = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    parse_scenario(&src)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        "schema_version = 1\n[robot]\nstart = [0.0, 0.0]\n[target]\nmean = [3.0, 4.0]\n";

    #[test]
    fn minimal_document_uses_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.motion.controls.len(), 4);
        assert_eq!(s.motion, MotionModel::axis_moves(1.0));
        assert_eq!(s.candidates, 5);
        assert_eq!(s.target_true0, Vec2::new(3.0, 4.0));
        assert_eq!(s.prune, PruneConfig::exact());
    }

    #[test]
    fn round_trip() {
        let mut s = Scenario::default();
        s.target_estimate0.cov = SymMat2::new(2.5, 0.3, 1.0 / 3.0);
        s.prune.domination = DominationMode::SimplexGrid { resolution: 7 };
        s.prune.eps1 = 0.1;
        s.seed = 99;
        let text = s.to_toml_string();
        assert_eq!(parse_scenario(&text).unwrap(), s);
    }

    fn with_sensor(extra: &str) -> String {
        format!("{MINIMAL}[sensor]\n{extra}\n")
    }

    #[test]
    fn zero_range_is_rejected_with_line() {
        let doc = with_sensor("base_var = 1.0\nrange = 0.0");
        let err = parse_scenario(&doc).unwrap_err();
        assert_eq!(err.code(), "E008");
        assert_eq!(err.line(), Some(8));
        assert!(err.to_string().contains("line 8"));
    }

    #[test]
    fn every_violation_has_a_distinct_code() {
        let cases: Vec<(String, &str)> = vec![
            (
                "schema_version = 1\nseed = 1\n[robot]\nstart = [0.0,\n".into(),
                "E002",
            ),
            (
                "schema_version = 2\n[robot]\nstart=[0.0,0.0]\n[target]\nmean=[1.0,1.0]\n".into(),
                "E003",
            ),
            (
                "schema_version = 1\n[target]\nmean=[1.0,1.0]\n".into(),
                "E004",
            ),
            (format!("{MINIMAL}true_position = [nan, 0.0]\n"), "E005"),
            (
                format!("{MINIMAL}covariance = [[1.0, 0.5], [0.2, 1.0]]\n"),
                "E006",
            ),
            (
                format!("{MINIMAL}covariance = [[1.0, 2.0], [2.0, 1.0]]\n"),
                "E007",
            ),
            (with_sensor("range = -1.0"), "E008"),
            (with_sensor("ceiling = 0.0"), "E009"),
            (with_sensor("slope_var = -0.5"), "E010"),
            (format!("candidate_mode = \"uniform\"\n{MINIMAL}"), "E011"),
            (format!("horizon = 0\n{MINIMAL}"), "E012"),
            (format!("candidates = 0\n{MINIMAL}"), "E013"),
            (format!("{MINIMAL}[motion]\ncontrols = []\n"), "E014"),
            (format!("{MINIMAL}[prune]\neps1 = -0.1\n"), "E015"),
            (
                format!("{MINIMAL}[prune]\ndomination = \"simplex_grid\"\ngrid_resolution = 0\n"),
                "E016",
            ),
            (format!("{MINIMAL}[motion]\nstep_size = 0.0\n"), "E017"),
        ];
        let mut seen = std::collections::BTreeSet::new();
        for (doc, code) in &cases {
            let err = parse_scenario(doc).expect_err(doc);
            assert_eq!(err.code(), *code, "{doc}\n{err}");
            seen.insert(err.code());
        }
        assert_eq!(seen.len(), cases.len());
        let io = load_scenario(Path::new("/definitely/not/here.toml")).unwrap_err();
        assert_eq!(io.code(), "E001");
    }

    #[test]
    fn unknown_prune_mode_is_rejected() {
        let err = parse_scenario(&format!("{MINIMAL}[prune]\ndomination = \"sdp\"\n")).unwrap_err();
        assert_eq!(err.code(), "E011");
        assert_eq!(err.line(), Some(7));
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = Scenario::default();
        let mut b = Scenario::default();
        assert_eq!(a.digest(), b.digest());
        b.seed = 1;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 16);
    }
}
