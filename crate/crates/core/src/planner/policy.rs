use std::collections::BTreeMap;

use serde::Serialize;

use super::tree::{NodeId, NodeKind, PolicyTree};

/// Control index chosen at every expanded Control node of a tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Policy {
    pub root_control: usize,
    pub decisions: BTreeMap<NodeId, usize>,
}

impl Policy {
    pub fn control_at(&self, node: NodeId) -> Option<usize> {
        self.decisions.get(&node).copied()
    }
}

/// Reads off the arg-min control (lowest index on ties) at each kept Control
/// node, i.e. the robot's response to every candidate measurement sequence.
pub fn extract_policy(tree: &PolicyTree) -> Policy {
    let mut decisions = BTreeMap::new();
    for (id, node) in tree.nodes().iter().enumerate() {
        if node.kind != NodeKind::Control || !node.is_kept() {
            continue;
        }
        if let Some(child) = node.chosen {
            let idx = tree
                .node(child)
                .label
                .index()
                .expect("control branch has an index");
            decisions.insert(id, idx);
        }
    }
    let root_control = decisions[&PolicyTree::ROOT];
    Policy {
        root_control,
        decisions,
    }
}
