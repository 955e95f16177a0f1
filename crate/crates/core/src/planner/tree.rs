use serde::{Deserialize, Serialize};

use crate::gridworld::{GridMap, State};

use super::{cost, Path};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub state: State,
    pub parent: Option<usize>,
    pub cost: f64,
}

/// Rooted search tree with parent links, child lists and cost-to-come.
/// Node 0 is the root. Rewiring can hang a node under a later one, so
/// acyclicity is checked by walking parent links rather than by index order.
#[derive(Clone, Debug, Default)]
pub struct PlanTree {
    nodes: Vec<TreeNode>,
    children: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TreeViolation {
    Empty,
    RootCount(usize),
    RootCost(f64),
    DanglingParent { node: usize, parent: usize },
    CostMismatch { node: usize, stored: f64, expected: f64 },
    CollidingEdge { node: usize },
    Cycle { node: usize },
    ChildListMismatch { node: usize },
}

impl std::fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TreeViolation::Empty => write!(f, "tree has no nodes"),
            TreeViolation::RootCount(n) => write!(f, "tree has {n} roots"),
            TreeViolation::RootCost(c) => write!(f, "root cost is {c}, not 0"),
            TreeViolation::DanglingParent { node, parent } => {
                write!(f, "node {node} points to missing parent {parent}")
            }
            TreeViolation::CostMismatch {
                node,
                stored,
                expected,
            } => write!(f, "node {node} stores cost {stored}, expected {expected}"),
            TreeViolation::CollidingEdge { node } => {
                write!(f, "edge into node {node} is not collision-free")
            }
            TreeViolation::Cycle { node } => write!(f, "node {node} lies on a parent cycle"),
            TreeViolation::ChildListMismatch { node } => {
                write!(f, "child lists disagree with parent link of node {node}")
            }
        }
    }
}

impl std::error::Error for TreeViolation {}

impl PlanTree {
    pub fn with_root(root: State) -> Self {
        PlanTree {
            nodes: vec![TreeNode {
                state: root,
                parent: None,
                cost: 0.0,
            }],
            children: vec![Vec::new()],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub(crate) fn push(&mut self, state: State, parent: usize) -> usize {
        let cost = self.nodes[parent].cost + cost(&self.nodes[parent].state, &state);
        let index = self.nodes.len();
        self.nodes.push(TreeNode {
            state,
            parent: Some(parent),
            cost,
        });
        self.children.push(Vec::new());
        self.children[parent].push(index);
        index
    }

    /// Re-parents `node` under `new_parent` and shifts the cost of its whole
    /// subtree. Panics if the move would increase the node's cost.
    pub(crate) fn reparent(&mut self, node: usize, new_parent: usize) {
        let new_cost =
            self.nodes[new_parent].cost + cost(&self.nodes[new_parent].state, &self.nodes[node].state);
        let delta = new_cost - self.nodes[node].cost;
        assert!(
            delta <= 0.0,
            "rewire would raise the cost of node {node} by {delta}"
        );
        if let Some(old) = self.nodes[node].parent {
            let siblings = &mut self.children[old];
            if let Some(pos) = siblings.iter().position(|&c| c == node) {
                siblings.swap_remove(pos);
            }
        }
        self.nodes[node].parent = Some(new_parent);
        self.children[new_parent].push(node);
        self.nodes[node].cost = new_cost;
        let mut stack: Vec<usize> = self.children[node].clone();
        while let Some(i) = stack.pop() {
            self.nodes[i].cost += delta;
            stack.extend_from_slice(&self.children[i]);
        }
    }

    /// States from the root to `node`.
    pub fn path_to(&self, node: usize) -> Path {
        let mut states = Vec::new();
        let mut cur = Some(node);
        while let Some(i) = cur {
            states.push(self.nodes[i].state);
            cur = self.nodes[i].parent;
        }
        states.reverse();
        let cost = self.nodes[node].cost;
        Path { states, cost }
    }

    /// Checks every structural invariant: a single zero-cost root, costs
    /// consistent with parent costs plus edge length, collision-free edges,
    /// acyclic parent links and child lists that mirror the parent links.
    pub fn validate(&self, map: &GridMap) -> Result<(), TreeViolation> {
        if self.nodes.is_empty() {
            return Err(TreeViolation::Empty);
        }
        let roots = self.nodes.iter().filter(|n| n.parent.is_none()).count();
        if roots != 1 || self.nodes[0].parent.is_some() {
            return Err(TreeViolation::RootCount(roots));
        }
        if self.nodes[0].cost != 0.0 {
            return Err(TreeViolation::RootCost(self.nodes[0].cost));
        }
        for (i, n) in self.nodes.iter().enumerate().skip(1) {
            let p = n.parent.expect("single root checked above");
            if p >= self.nodes.len() {
                return Err(TreeViolation::DanglingParent { node: i, parent: p });
            }
            let parent = &self.nodes[p];
            let expected = parent.cost + cost(&parent.state, &n.state);
            if (expected - n.cost).abs() > 1e-6 * expected.max(1.0) {
                return Err(TreeViolation::CostMismatch {
                    node: i,
                    stored: n.cost,
                    expected,
                });
            }
            if !self.children[p].contains(&i) {
                return Err(TreeViolation::ChildListMismatch { node: i });
            }
            let edge_ok = map.in_bounds(&parent.state)
                && map.in_bounds(&n.state)
                && map.segment_free_in_bounds(&parent.state, &n.state);
            if !edge_ok {
                return Err(TreeViolation::CollidingEdge { node: i });
            }
        }
        let child_total: usize = self.children.iter().map(Vec::len).sum();
        if child_total != self.nodes.len() - 1 {
            return Err(TreeViolation::ChildListMismatch { node: 0 });
        }
        // Every node must reach the root; memoize nodes already known to.
        let mut reaches_root = vec![false; self.nodes.len()];
        reaches_root[0] = true;
        let mut trail = Vec::new();
        for start in 1..self.nodes.len() {
            trail.clear();
            let mut cur = start;
            while !reaches_root[cur] {
                if trail.len() > self.nodes.len() {
                    return Err(TreeViolation::Cycle { node: start });
                }
                trail.push(cur);
                cur = self.nodes[cur].parent.expect("non-root has a parent");
            }
            for &t in &trail {
                reaches_root[t] = true;
            }
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn nodes_mut(&mut self) -> &mut Vec<TreeNode> {
        &mut self.nodes
    }
}
