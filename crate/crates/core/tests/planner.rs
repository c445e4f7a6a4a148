use minimax_track::estimation::riccati_step;
use minimax_track::harness::gen::{random_scenario, ScenarioLimits};
use minimax_track::linalg::Vec2;
use minimax_track::oracle::{full_minimax, root_branch_values};
use minimax_track::planner::export::{export_tree, NodeStatsRow};
use minimax_track::planner::{
    build_tree, extract_policy, full_tree_size, CountError, DominationMode, NodeKind, NodeStatus,
    PlannerError, PolicyTree, PruneConfig,
};
use minimax_track::Scenario;
use proptest::prelude::*;

fn small(seed: u64) -> Scenario {
    random_scenario(seed, ScenarioLimits::default())
}

#[test]
fn chain_of_three_nodes() {
    let mut sc = Scenario::default();
    sc.horizon = 1;
    sc.candidates = 1;
    sc.motion.controls = vec![Vec2::new(1.0, 0.0)];
    let tree = build_tree(&sc, &PruneConfig::disabled()).unwrap();
    assert_eq!(tree.len(), 3);
    let expected = riccati_step(
        sc.target_estimate0.cov,
        &sc.target_model,
        &sc.sensor,
        Vec2::new(1.0, 0.0),
        sc.target_estimate0.mean,
    )
    .unwrap()
    .trace();
    assert_eq!(tree.minimax_value, expected);
}

#[test]
fn two_by_two_tree_has_31_nodes() {
    let mut sc = Scenario::default();
    sc.horizon = 2;
    sc.candidates = 2;
    sc.motion.controls.truncate(2);
    let tree = build_tree(&sc, &PruneConfig::disabled()).unwrap();
    assert_eq!(tree.len(), 31);
    assert_eq!(tree.node_count_pruned, 0);
}

#[test]
fn zero_horizon_is_rejected() {
    let sc = Scenario::default().with_horizon(0);
    assert_eq!(
        build_tree(&sc, &PruneConfig::exact()).unwrap_err(),
        PlannerError::ZeroHorizon
    );
}

#[test]
fn oversized_unpruned_trees_are_refused() {
    let sc = Scenario::default().with_horizon(7);
    assert!(matches!(
        build_tree(&sc, &PruneConfig::disabled()),
        Err(PlannerError::TreeTooLarge { .. })
    ));
    let sc = Scenario::default().with_horizon(40);
    assert_eq!(
        build_tree(&sc, &PruneConfig::disabled()).unwrap_err(),
        PlannerError::Count(CountError::Overflow)
    );
}

fn check_structure(tree: &PolicyTree, sc: &Scenario) {
    let leaf_depth = 2 * sc.horizon;
    assert_eq!(tree.minimax_value, tree.root().value.unwrap());
    for (id, n) in tree.nodes().iter().enumerate() {
        let expected = if n.depth == leaf_depth {
            NodeKind::Leaf
        } else if n.depth % 2 == 0 {
            NodeKind::Control
        } else {
            NodeKind::Measurement
        };
        assert_eq!(n.kind, expected, "node {id}");
        if !n.is_kept() || n.value.is_none() {
            continue;
        }
        let v = n.value.unwrap();
        match n.kind {
            NodeKind::Leaf => assert_eq!(v, n.estimate.cov.trace()),
            NodeKind::Control => {
                assert!(n.children.len() <= sc.motion.len());
                let best = n
                    .children
                    .iter()
                    .map(|&c| tree.node(c))
                    .filter(|c| c.is_kept() && !c.cutoff)
                    .map(|c| c.value.unwrap())
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(v, best, "control node {id}");
            }
            NodeKind::Measurement => {
                assert!(n.children.len() <= sc.candidates);
                let kept: Vec<_> = n
                    .children
                    .iter()
                    .map(|&c| tree.node(c))
                    .filter(|c| c.is_kept())
                    .collect();
                if !n.cutoff {
                    assert_eq!(
                        kept.len(),
                        n.children.len(),
                        "measurement node {id} lost a child"
                    );
                }
                let worst = kept
                    .iter()
                    .map(|c| c.value.unwrap())
                    .fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(v, worst, "measurement node {id}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unpruned_tree_matches_formula_and_oracle(seed in any::<u64>()) {
        let sc = small(seed);
        let tree = build_tree(&sc, &PruneConfig::disabled()).unwrap();
        let full = full_tree_size(sc.motion.len() as u64, sc.candidates as u64, (2 * sc.horizon + 1) as u32).unwrap();
        prop_assert_eq!(tree.len() as u64, full);
        prop_assert_eq!(tree.minimax_value, full_minimax(&sc).unwrap());
        check_structure(&tree, &sc);
    }

    #[test]
    fn exact_pruning_preserves_the_value(seed in any::<u64>()) {
        let sc = small(seed);
        let j_star = full_minimax(&sc).unwrap();
        for prune in [PruneConfig::exact(), PruneConfig { domination: DominationMode::SimplexGrid { resolution: 10 }, ..PruneConfig::exact() }] {
            let tree = build_tree(&sc, &prune).unwrap();
            prop_assert!((tree.minimax_value - j_star).abs() <= 1e-9, "{} vs {}", tree.minimax_value, j_star);
            let full = full_tree_size(sc.motion.len() as u64, sc.candidates as u64, (2 * sc.horizon + 1) as u32).unwrap();
            prop_assert!((tree.node_count_kept + tree.node_count_pruned) as u64 <= full);
            check_structure(&tree, &sc);
        }
    }

    #[test]
    fn relaxed_alpha_stays_within_eps1(seed in any::<u64>(), eps1 in 0.0f64..2.0) {
        let sc = small(seed);
        let j_star = full_minimax(&sc).unwrap();
        let tree = build_tree(&sc, &PruneConfig::relaxed(eps1, 0.0)).unwrap();
        let gap = tree.minimax_value - j_star;
        prop_assert!(gap >= -1e-9 && gap <= eps1 + 1e-9, "gap {}", gap);
    }

    #[test]
    fn root_policy_is_the_oracle_argmin(seed in any::<u64>()) {
        let sc = small(seed);
        let values = root_branch_values(&sc).unwrap();
        let best = values.iter().copied().fold(f64::INFINITY, f64::min);
        let argmin = values.iter().position(|&v| v == best).unwrap();
        let policy = extract_policy(&build_tree(&sc, &PruneConfig::disabled()).unwrap());
        prop_assert_eq!(policy.root_control, argmin);
    }
}

#[test]
fn redundancy_fires_on_some_scenarios_without_changing_the_value() {
    let mut fired = 0;
    for seed in 0..300 {
        let sc = small(seed);
        let tree = build_tree(&sc, &PruneConfig::exact()).unwrap();
        if tree
            .nodes()
            .iter()
            .any(|n| n.status == NodeStatus::RedundancyPruned)
        {
            fired += 1;
            assert!(
                (tree.minimax_value - full_minimax(&sc).unwrap()).abs() <= 1e-9,
                "seed {seed}"
            );
        }
    }
    assert!(fired > 0);
}

#[test]
fn redundancy_keeps_one_option_per_decision() {
    for seed in 0..300 {
        let sc = small(seed);
        let tree = build_tree(&sc, &PruneConfig::relaxed(0.0, 1.0)).unwrap();
        for n in tree
            .nodes()
            .iter()
            .filter(|n| n.kind == NodeKind::Control && n.is_kept() && n.value.is_some())
        {
            if n.depth < 2 * sc.horizon {
                assert!(
                    n.children.iter().any(|&c| tree.node(c).is_kept()),
                    "seed {seed}"
                );
            }
        }
    }
}

#[test]
fn single_control_policy() {
    let mut sc = Scenario::default();
    sc.motion.controls = vec![Vec2::new(0.0, 1.0)];
    sc.horizon = 3;
    let tree = build_tree(&sc, &PruneConfig::exact()).unwrap();
    let policy = extract_policy(&tree);
    assert_eq!(policy.root_control, 0);
    assert!(policy.decisions.values().all(|&c| c == 0));
    assert_eq!(policy.decisions.len(), 1 + 5 + 25);
}

#[test]
fn cheaper_branch_is_chosen() {
    // moving towards the target lowers the measurement noise
    let mut sc = Scenario::default();
    sc.horizon = 1;
    sc.candidates = 1;
    sc.robot_start = Vec2::new(0.0, 0.0);
    sc.target_estimate0.mean = Vec2::new(5.0, 0.0);
    sc.motion.controls = vec![Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)];
    let policy = extract_policy(&build_tree(&sc, &PruneConfig::exact()).unwrap());
    assert_eq!(policy.root_control, 0);
    sc.motion.controls.reverse();
    let policy = extract_policy(&build_tree(&sc, &PruneConfig::exact()).unwrap());
    assert_eq!(policy.root_control, 1);
}

#[test]
fn export_and_stats() {
    let sc = Scenario::default();
    let tree = build_tree(&sc, &PruneConfig::exact()).unwrap();
    let doc = serde_json::to_value(export_tree(&tree)).unwrap();
    assert_eq!(doc["kind"], "control");
    assert_eq!(doc["children"].as_array().unwrap().len(), 4);
    assert_eq!(doc["children"][0]["kind"], "measurement");
    let row = NodeStatsRow::from_tree(&tree, 505);
    assert_eq!(row.kept + row.pruned, tree.len());
    assert_eq!(row.minimax_value, tree.minimax_value);
    assert_eq!(row.scenario_digest, sc.digest());
}

#[test]
fn kept_nodes_shrink_as_eps1_grows_on_default_scenario() {
    for t in [2, 3, 4] {
        let sc = Scenario::default().with_horizon(t);
        let counts: Vec<usize> = [0.0, 0.01, 0.1, 1.0]
            .iter()
            .map(|&e| {
                build_tree(&sc, &PruneConfig::relaxed(e, 0.0))
                    .unwrap()
                    .node_count_kept
            })
            .collect();
        assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
    }
}
