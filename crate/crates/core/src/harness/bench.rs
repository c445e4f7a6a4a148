//! Node-count sweeps over tree depth, `ε₁`/`ε₂` and target positions.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{io_err, HarnessError};
use crate::bounds::bound_report;
use crate::linalg::Vec2;
use crate::oracle::full_minimax;
use crate::planner::tree::MAX_UNPRUNED_NODES;
use crate::planner::{build_tree, full_tree_size};
use crate::scenario::{load_scenario, Scenario};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    /// Base scenario, relative to the sweep file; built-in defaults if absent.
    pub scenario: Option<PathBuf>,
    /// Tree depths in levels (`2T + 1`, odd).
    pub depths: Vec<u32>,
    #[serde(default = "zero_grid")]
    pub eps1: Vec<f64>,
    #[serde(default = "zero_grid")]
    pub eps2: Vec<f64>,
    #[serde(default = "one")]
    pub target_samples: usize,
    /// Half-width of the square around the base target mean that samples are drawn from.
    #[serde(default = "default_radius")]
    pub sample_radius: f64,
    #[serde(default)]
    pub sample_seed: u64,
}

fn zero_grid() -> Vec<f64> {
    vec![0.0]
}

fn one() -> usize {
    1
}

fn default_radius() -> f64 {
    3.0
}

impl SweepConfig {
    pub fn parse(src: &str) -> Result<Self, HarnessError> {
        let cfg: SweepConfig =
            toml::from_str(src).map_err(|e| HarnessError::Sweep(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Sweep(m));
        if self.schema_version != 1 {
            return bad(format!(
                "unsupported schema_version {}",
                self.schema_version
            ));
        }
        if self.depths.is_empty() {
            return bad("depths must not be empty".into());
        }
        if let Some(d) = self.depths.iter().find(|&&d| d < 3 || d % 2 == 0) {
            return bad(format!("depth {d} is not an odd number >= 3"));
        }
        if let Some(e) = self
            .eps1
            .iter()
            .chain(&self.eps2)
            .find(|e| !(e.is_finite() && **e >= 0.0))
        {
            return bad(format!("epsilon {e} must be finite and >= 0"));
        }
        if self.eps1.is_empty() || self.eps2.is_empty() {
            return bad("epsilon grids must not be empty".into());
        }
        if self.target_samples == 0 {
            return bad("target_samples must be >= 1".into());
        }
        if !(self.sample_radius.is_finite() && self.sample_radius >= 0.0) {
            return bad("sample_radius must be finite and >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub depth: u32,
    pub horizon: usize,
    pub sample: usize,
    pub target_x: f64,
    pub target_y: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub full_nodes: u64,
    pub kept_nodes: usize,
    pub pruned_nodes: usize,
    pub minimax_value: f64,
    /// Unpruned optimum, when the full tree is small enough to enumerate.
    #[serde(rename = "J_star")]
    pub j_star: Option<f64>,
    /// Certified bound `max(ε₁, B^ε₂)`.
    pub bound: f64,
    /// `minimax_value − J_star`.
    pub slack: Option<f64>,
    #[serde(skip)]
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummaryRow {
    pub depth: u32,
    pub eps1: f64,
    pub eps2: f64,
    pub samples: usize,
    pub kept_mean: f64,
    pub kept_std: f64,
    pub pruned_mean: f64,
    pub pruned_std: f64,
    pub value_mean: f64,
    pub value_std: f64,
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Target means for the sweep; sample 0 is the base scenario's own mean.
pub fn target_samples(base: Vec2, cfg: &SweepConfig) -> Vec<Vec2> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sample_seed);
    let r = cfg.sample_radius;
    (0..cfg.target_samples)
        .map(|i| {
            if i == 0 || r == 0.0 {
                base
            } else {
                base + Vec2::new(rng.random_range(-r..=r), rng.random_range(-r..=r))
            }
        })
        .collect()
}

/// Runs the sweep over a base scenario and returns rows in sweep order
/// (depth, ε₁, ε₂, sample).
pub fn run_sweep(base: &Scenario, cfg: &SweepConfig) -> Result<Vec<BenchRow>, HarnessError> {
    let samples = target_samples(base.target_estimate0.mean, cfg);
    let mut rows = Vec::new();
    for &depth in &cfg.depths {
        let horizon = (depth as usize - 1) / 2;
        let full = full_tree_size(base.motion.len() as u64, base.candidates as u64, depth)
            .map_err(|e| HarnessError::Sweep(format!("depth {depth}: {e}")))?;
        let mut j_star = vec![None; samples.len()];
        for &eps1 in &cfg.eps1 {
            for &eps2 in &cfg.eps2 {
                for (i, &target) in samples.iter().enumerate() {
                    let mut sc = base.clone().with_horizon(horizon);
                    let shift = target - sc.target_estimate0.mean;
                    sc.target_estimate0.mean = target;
                    sc.target_true0 = sc.target_true0 + shift;
                    sc.prune.eps1 = eps1;
                    sc.prune.eps2 = eps2;

                    if j_star[i].is_none() && full <= MAX_UNPRUNED_NODES {
                        j_star[i] = Some(full_minimax(&sc)?);
                    }
                    let start = Instant::now();
                    let tree = build_tree(&sc, &sc.prune)?;
                    let wall_time = start.elapsed().as_secs_f64();
                    let bound = bound_report(&tree, &sc)?.combined;
                    log::debug!(
                        "depth {depth} eps ({eps1}, {eps2}) sample {i}: {} kept",
                        tree.node_count_kept
                    );
                    rows.push(BenchRow {
                        depth,
                        horizon,
                        sample: i,
                        target_x: target.x,
                        target_y: target.y,
                        eps1,
                        eps2,
                        full_nodes: full,
                        kept_nodes: tree.node_count_kept,
                        pruned_nodes: tree.node_count_pruned,
                        minimax_value: tree.minimax_value,
                        j_star: j_star[i],
                        bound,
                        slack: j_star[i].map(|j| tree.minimax_value - j),
                        wall_time,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Mean and population std across target samples for each (depth, ε₁, ε₂).
pub fn summarize(rows: &[BenchRow]) -> Vec<BenchSummaryRow> {
    let mut out: Vec<BenchSummaryRow> = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let key = (rows[start].depth, rows[start].eps1, rows[start].eps2);
        let end = start
            + rows[start..]
                .iter()
                .take_while(|r| (r.depth, r.eps1, r.eps2) == key)
                .count();
        let group = &rows[start..end];
        let (kept_mean, kept_std) = mean_std(group.iter().map(|r| r.kept_nodes as f64));
        let (pruned_mean, pruned_std) = mean_std(group.iter().map(|r| r.pruned_nodes as f64));
        let (value_mean, value_std) = mean_std(group.iter().map(|r| r.minimax_value));
        out.push(BenchSummaryRow {
            depth: key.0,
            eps1: key.1,
            eps2: key.2,
            samples: group.len(),
            kept_mean,
            kept_std,
            pruned_mean,
            pruned_std,
            value_mean,
            value_std,
        });
        start = end;
    }
    out
}

/// Path next to `out` with `suffix` replacing its extension.
pub fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

/// Runs the sweep and writes the rows CSV to `out_csv`, the per-group
/// summary to `<stem>.summary.csv` and timings to `<stem>.timing.csv`.
pub fn cmd_bench(sweep_path: &Path, out_csv: &Path) -> Result<Vec<BenchRow>, HarnessError> {
    let src = std::fs::read_to_string(sweep_path).map_err(io_err(sweep_path))?;
    let cfg = SweepConfig::parse(&src)?;
    let base = match &cfg.scenario {
        Some(p) => {
            let p = sweep_path.parent().unwrap_or(Path::new(".")).join(p);
            load_scenario(&p)?
        }
        None => Scenario::default(),
    };
    let rows = run_sweep(&base, &cfg)?;

    let mut w = csv::Writer::from_path(out_csv).map_err(|e| csv_path_err(e, out_csv))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(out_csv))?;

    let summary_path = sidecar_path(out_csv, "summary.csv");
    let mut w =
        csv::Writer::from_path(&summary_path).map_err(|e| csv_path_err(e, &summary_path))?;
    for r in summarize(&rows) {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(&summary_path))?;

    let timing_path = sidecar_path(out_csv, "timing.csv");
    let mut w = csv::Writer::from_path(&timing_path).map_err(|e| csv_path_err(e, &timing_path))?;
    w.write_record(["depth", "sample", "eps1", "eps2", "wall_time"])?;
    for r in &rows {
        w.write_record([
            r.depth.to_string(),
            r.sample.to_string(),
            r.eps1.to_string(),
            r.eps2.to_string(),
            r.wall_time.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(&timing_path))?;
    Ok(rows)
}

fn csv_path_err(e: csv::Error, path: &Path) -> HarnessError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => HarnessError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => HarnessError::Sweep(format!("{other:?}")),
    }
}
