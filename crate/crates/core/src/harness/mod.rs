//! Command implementations behind the CLI, plus the seeded generators used
//! by the verification suites.

pub mod bench;
pub mod gen;
pub mod plan;
pub mod simulate;
pub mod verify;

use std::path::PathBuf;

use thiserror::Error;

use crate::estimation::EstimationError;
use crate::planner::PlannerError;
use crate::scenario::ScenarioError;
use crate::simulation::SimError;

pub use bench::{cmd_bench, BenchRow, SweepConfig};
pub use plan::{cmd_plan, PlanOutcome};
pub use simulate::{cmd_simulate, SimulateOptions};
pub use verify::{cmd_verify, SuiteResult, VerifyOptions, VerifyReport};

/// Version tag written into every structured-text export.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

/// Tolerance for comparisons against the brute-force oracle.
pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid sweep: {0}")]
    Sweep(String),
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}
