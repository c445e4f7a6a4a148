//! Alpha cutoffs and state-dependent algebraic-redundancy tests.

use serde::{Deserialize, Serialize};

use crate::estimation::{psd_dominates, SensorModel};
use crate::linalg::{Mat2, SymMat2, Vec2, TOL_PSD};

/// Peer sets larger than this are not searched with the full simplex grid.
pub const MAX_GRID_PEERS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominationMode {
    /// One peer at a time (α an indicator vector).
    Pairwise,
    /// Convex weights on a grid with `resolution` steps per unit.
    SimplexGrid { resolution: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruneConfig {
    pub eps1: f64,
    pub eps2: f64,
    pub domination: DominationMode,
    pub alpha_enabled: bool,
    pub redundancy_enabled: bool,
    /// Negates the horizon noise term in the redundancy test. Only used to
    /// check that the verification suite notices a broken pruning rule.
    #[doc(hidden)]
    #[serde(skip)]
    pub fault_flip_noise_term: bool,
}

impl PruneConfig {
    /// Both prunes on, no relaxation.
    pub fn exact() -> Self {
        Self {
            eps1: 0.0,
            eps2: 0.0,
            domination: DominationMode::Pairwise,
            alpha_enabled: true,
            redundancy_enabled: true,
            fault_flip_noise_term: false,
        }
    }

    /// Full enumeration.
    pub fn disabled() -> Self {
        Self {
            alpha_enabled: false,
            redundancy_enabled: false,
            ..Self::exact()
        }
    }

    pub fn relaxed(eps1: f64, eps2: f64) -> Self {
        Self {
            eps1,
            eps2,
            ..Self::exact()
        }
    }

    pub fn any_enabled(&self) -> bool {
        self.alpha_enabled || self.redundancy_enabled
    }
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self::exact()
    }
}

/// Relaxed alpha test: prune when the subtree cannot beat the best completed
/// control branch by more than `eps1`.
pub fn alpha_cutoff(best_so_far: f64, subtree_value_lower_bound: f64, eps1: f64) -> bool {
    subtree_value_lower_bound >= best_so_far - eps1
}

/// What the redundancy test needs to know about a node.
#[derive(Debug, Clone, Copy)]
pub struct NodeView<'a> {
    pub robot: Vec2,
    pub cov: SymMat2,
    /// Branch indices taken from the root; the node's depth is `path.len()`.
    pub path: &'a [usize],
}

/// Depth of the lowest common ancestor of two distinct nodes at equal depth.
pub fn lca_depth(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Even depths hold Control (min) nodes.
pub fn lca_is_control(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && a != b && lca_depth(a, b) % 2 == 0
}

/// Whether `candidate` is algebraically redundant with respect to `peers`.
///
/// Requires every peer to sit at the candidate's depth with the same robot
/// position and a Control-node LCA, and
/// `H(Σᴬ + ε₂I)Hᵀ ⪰ Σ αᵢ[HΣⁱHᵀ + K(δ₁² + δ₂²𝒞)I]` for some convex `α`
/// admitted by the domination mode.
pub fn redundancy_prunable(
    candidate: &NodeView<'_>,
    peers: &[NodeView<'_>],
    remaining_meas_steps: usize,
    sensor: &SensorModel,
    prune: &PruneConfig,
) -> bool {
    if peers.is_empty() {
        return false;
    }
    let structural = peers.iter().all(|p| {
        p.path.len() == candidate.path.len()
            && p.robot == candidate.robot
            && lca_is_control(candidate.path, p.path)
    });
    if !structural {
        return false;
    }
    let h = sensor.obs_matrix_at(candidate.robot);
    let covs: Vec<SymMat2> = peers.iter().map(|p| p.cov).collect();
    dominated(candidate.cov, &covs, h, remaining_meas_steps, sensor, prune)
}

/// Necessary condition for [`dominated`] against any PSD peers: the left side
/// minus the horizon noise term must itself be PSD.
pub(crate) fn may_dominate(
    cov: SymMat2,
    h: Mat2,
    remaining_meas_steps: usize,
    sensor: &SensorModel,
    prune: &PruneConfig,
) -> bool {
    let (lhs, slack) = domination_lhs(cov, h, remaining_meas_steps, sensor, prune);
    lhs.min_eigenvalue() + slack >= -2.0 * TOL_PSD
}

fn domination_lhs(
    cov: SymMat2,
    h: Mat2,
    remaining_meas_steps: usize,
    sensor: &SensorModel,
    prune: &PruneConfig,
) -> (SymMat2, f64) {
    let noise_term = remaining_meas_steps as f64 * sensor.max_variance();
    // psd_dominates adds its slack to the left side
    let slack = if prune.fault_flip_noise_term {
        noise_term
    } else {
        -noise_term
    };
    (h.congruence(cov.add_identity(prune.eps2)), slack)
}

/// The covariance test alone, for peers already known to satisfy the structural tests.
pub(crate) fn dominated(
    cov: SymMat2,
    peer_covs: &[SymMat2],
    h: Mat2,
    remaining_meas_steps: usize,
    sensor: &SensorModel,
    prune: &PruneConfig,
) -> bool {
    let (lhs, slack) = domination_lhs(cov, h, remaining_meas_steps, sensor, prune);
    let projected: Vec<SymMat2> = peer_covs.iter().map(|c| h.congruence(*c)).collect();

    if projected.iter().any(|p| psd_dominates(lhs, *p, slack)) {
        return true;
    }
    let DominationMode::SimplexGrid { resolution } = prune.domination else {
        return false;
    };
    let resolution = resolution.max(1);
    if projected.len() <= MAX_GRID_PEERS {
        grid_dominates(lhs, &projected, slack, resolution)
    } else {
        (0..projected.len()).any(|i| {
            (i + 1..projected.len())
                .any(|j| grid_dominates(lhs, &[projected[i], projected[j]], slack, resolution))
        })
    }
}

fn grid_dominates(lhs: SymMat2, peers: &[SymMat2], slack: f64, resolution: u32) -> bool {
    let mut weights = vec![0u32; peers.len()];
    search_grid(lhs, peers, slack, resolution, &mut weights, 0, resolution)
}

fn search_grid(
    lhs: SymMat2,
    peers: &[SymMat2],
    slack: f64,
    resolution: u32,
    weights: &mut [u32],
    idx: usize,
    left: u32,
) -> bool {
    if idx + 1 == peers.len() {
        weights[idx] = left;
        let r = resolution as f64;
        let combo = peers
            .iter()
            .zip(weights.iter())
            .fold(SymMat2::ZERO, |acc, (p, &w)| acc + p.scale(w as f64 / r));
        return psd_dominates(lhs, combo, slack);
    }
    for w in 0..=left {
        weights[idx] = w;
        if search_grid(lhs, peers, slack, resolution, weights, idx + 1, left - w) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sensor_with_cap(cap: f64) -> SensorModel {
        SensorModel {
            obs_matrix: Mat2::IDENTITY,
            base_var: cap / 2.0,
            slope_var: cap / 10.0,
            range: 10.0,
            ceiling: 5.0,
        }
    }

    #[test]
    fn alpha_examples() {
        assert!(alpha_cutoff(10.0, 12.0, 0.0));
        assert!(!alpha_cutoff(10.0, 9.0, 0.0));
        assert!(alpha_cutoff(10.0, 9.5, 1.0));
        assert!(!alpha_cutoff(f64::INFINITY, 1e300, 0.0));
    }

    #[test]
    fn lca_kinds() {
        assert!(lca_is_control(&[0, 1, 2], &[1, 1, 2]));
        assert!(!lca_is_control(&[0, 1, 2], &[0, 2, 2]));
        assert!(lca_is_control(&[0, 1, 2], &[0, 1, 3]));
        assert!(!lca_is_control(&[0, 1, 2], &[0, 1, 2]));
    }

    #[test]
    fn dominating_peer_prunes() {
        let s = sensor_with_cap(2.0);
        let a_path = [0, 0, 1];
        let b_path = [1, 0, 0];
        let a = NodeView {
            robot: Vec2::ZERO,
            cov: SymMat2::scaled_identity(6.0),
            path: &a_path,
        };
        let b = NodeView {
            robot: Vec2::ZERO,
            cov: SymMat2::IDENTITY,
            path: &b_path,
        };
        assert!(redundancy_prunable(&a, &[b], 1, &s, &PruneConfig::exact()));
        // K = 3 needs 6I ⪰ I + 6I
        assert!(!redundancy_prunable(&a, &[b], 3, &s, &PruneConfig::exact()));
    }

    #[test]
    fn equal_covariance_never_prunes() {
        let s = sensor_with_cap(2.0);
        let a_path = [0, 0, 1];
        let b_path = [1, 0, 0];
        let cov = SymMat2::new(3.0, 0.5, 2.0);
        let a = NodeView {
            robot: Vec2::ZERO,
            cov,
            path: &a_path,
        };
        let b = NodeView {
            robot: Vec2::ZERO,
            cov,
            path: &b_path,
        };
        for k in 1..4 {
            assert!(!redundancy_prunable(&a, &[b], k, &s, &PruneConfig::exact()));
        }
    }

    #[test]
    fn structural_conditions_are_required() {
        let s = sensor_with_cap(1.0);
        let a_path = [0, 0, 1];
        let meas_lca = [0, 1, 1];
        let a = NodeView {
            robot: Vec2::ZERO,
            cov: SymMat2::scaled_identity(50.0),
            path: &a_path,
        };
        let other_robot = NodeView {
            robot: Vec2::new(1.0, 0.0),
            cov: SymMat2::IDENTITY,
            path: &[1, 0, 0],
        };
        let bad_lca = NodeView {
            robot: Vec2::ZERO,
            cov: SymMat2::IDENTITY,
            path: &meas_lca,
        };
        assert!(!redundancy_prunable(
            &a,
            &[other_robot],
            1,
            &s,
            &PruneConfig::exact()
        ));
        assert!(!redundancy_prunable(
            &a,
            &[bad_lca],
            1,
            &s,
            &PruneConfig::exact()
        ));
        assert!(!redundancy_prunable(&a, &[], 1, &s, &PruneConfig::exact()));
    }

    #[test]
    fn eps2_relaxes_the_test() {
        let s = sensor_with_cap(1.0);
        let a_path = [0, 0, 1];
        let b_path = [1, 0, 0];
        let a = NodeView {
            robot: Vec2::ZERO,
            cov: SymMat2::scaled_identity(1.95),
            path: &a_path,
        };
        let b = NodeView {
            robot: Vec2::ZERO,
            cov: SymMat2::IDENTITY,
            path: &b_path,
        };
        assert!(!redundancy_prunable(&a, &[b], 1, &s, &PruneConfig::exact()));
        assert!(redundancy_prunable(
            &a,
            &[b],
            1,
            &s,
            &PruneConfig::relaxed(0.0, 0.1)
        ));
    }

    #[test]
    fn grid_finds_convex_combination_pairwise_misses() {
        // diag(3,3) vs peers diag(0.5,4.5), diag(4.5,0.5) with noise term 0.4:
        // each peer alone leaves a negative eigenvalue, the midpoint
        // diag(2.5,2.5) + 0.4 I is dominated.
        let s = sensor_with_cap(0.4);
        let a_path = [0, 0, 1];
        let p1 = [1, 0, 0];
        let p2 = [2, 0, 0];
        let a = NodeView {
            robot: Vec2::ZERO,
            cov: SymMat2::diag(3.0, 3.0),
            path: &a_path,
        };
        let peers = [
            NodeView {
                robot: Vec2::ZERO,
                cov: SymMat2::diag(0.5, 4.5),
                path: &p1,
            },
            NodeView {
                robot: Vec2::ZERO,
                cov: SymMat2::diag(4.5, 0.5),
                path: &p2,
            },
        ];
        // Oracle: enumerate α on a resolution-10 grid and inspect eigenvalues.
        let mut feasible = Vec::new();
        for i in 0..=10 {
            let w = i as f64 / 10.0;
            let combo = SymMat2::diag(0.5 * w + 4.5 * (1.0 - w), 4.5 * w + 0.5 * (1.0 - w))
                .add_identity(0.4);
            let diff = SymMat2::diag(3.0, 3.0) - combo;
            if diff.min_eigenvalue() >= -1e-9 {
                feasible.push(i);
            }
        }
        assert_eq!(feasible, vec![5]);

        let pairwise = PruneConfig::exact();
        let grid = PruneConfig {
            domination: DominationMode::SimplexGrid { resolution: 10 },
            ..PruneConfig::exact()
        };
        assert!(!redundancy_prunable(&a, &peers, 1, &s, &pairwise));
        assert!(redundancy_prunable(&a, &peers, 1, &s, &grid));
        // Resolution 3 cannot represent α = (0.5, 0.5).
        let coarse = PruneConfig {
            domination: DominationMode::SimplexGrid { resolution: 3 },
            ..PruneConfig::exact()
        };
        assert!(!redundancy_prunable(&a, &peers, 1, &s, &coarse));
    }

    #[test]
    fn flipped_noise_term_prunes_equal_nodes() {
        let s = sensor_with_cap(1.0);
        let cov = SymMat2::IDENTITY;
        let faulty = PruneConfig {
            fault_flip_noise_term: true,
            ..PruneConfig::exact()
        };
        assert!(dominated(cov, &[cov], Mat2::IDENTITY, 1, &s, &faulty));
    }

    fn psd() -> impl Strategy<Value = SymMat2> {
        (0.0f64..8.0, 0.0f64..8.0, -1.0f64..1.0)
            .prop_map(|(a, b, r)| SymMat2::new(a, r * (a * b).sqrt(), b))
    }

    proptest! {
        #[test]
        fn grid_is_never_less_permissive(a in psd(), peers in prop::collection::vec(psd(), 1..6), k in 1usize..3, res in 1u32..6, eps2 in 0.0f64..0.5) {
            let s = sensor_with_cap(0.5);
            let pair = PruneConfig { eps2, ..PruneConfig::exact() };
            let grid = PruneConfig { domination: DominationMode::SimplexGrid { resolution: res }, ..pair };
            if dominated(a, &peers, Mat2::IDENTITY, k, &s, &pair) {
                prop_assert!(dominated(a, &peers, Mat2::IDENTITY, k, &s, &grid));
            }
        }

        #[test]
        fn larger_eps2_never_prunes_less(a in psd(), b in psd(), e1 in 0.0f64..1.0, e2 in 0.0f64..1.0) {
            let s = sensor_with_cap(0.5);
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let lo_cfg = PruneConfig::relaxed(0.0, lo);
            let hi_cfg = PruneConfig::relaxed(0.0, hi);
            if dominated(a, &[b], Mat2::IDENTITY, 1, &s, &lo_cfg) {
                prop_assert!(dominated(a, &[b], Mat2::IDENTITY, 1, &s, &hi_cfg));
            }
        }
    }
}
