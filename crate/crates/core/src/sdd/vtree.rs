use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VNode {
    /// Leaf for the legend variable with this index.
    Leaf(usize),
    Internal(usize, usize),
}

/// A full binary tree whose leaves are in one-to-one correspondence with
/// the variables of a legend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VTree {
    nodes: Vec<VNode>,
    root: usize,
    /// In-order interval `[lo, hi]` of leaf positions under each node.
    span: Vec<(usize, usize)>,
    leaf_of: Vec<usize>,
    /// Variables under each node, in in-order.
    order: Vec<usize>,
}

impl VTree {
    /// Checks that `nodes` form a tree rooted at `root` whose leaves carry
    /// each of `0..n_vars` exactly once.
    pub fn new(nodes: Vec<VNode>, root: usize, n_vars: usize) -> Result<VTree, String> {
        if root >= nodes.len() {
            return Err("v-tree root out of range".into());
        }
        let mut span = vec![(usize::MAX, 0); nodes.len()];
        let mut leaf_of = vec![usize::MAX; n_vars];
        let mut order = Vec::with_capacity(n_vars);
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![(root, false)];
        while let Some((x, done)) = stack.pop() {
            match nodes[x] {
                VNode::Leaf(v) => {
                    if seen[x] {
                        return Err(format!("v-tree node {x} reached twice"));
                    }
                    seen[x] = true;
                    if v >= n_vars || leaf_of[v] != usize::MAX {
                        return Err(format!("v-tree leaf variable {v} repeated or out of range"));
                    }
                    leaf_of[v] = x;
                    span[x] = (order.len(), order.len());
                    order.push(v);
                }
                VNode::Internal(l, r) if done => span[x] = (span[l].0, span[r].1),
                VNode::Internal(l, r) => {
                    if seen[x] {
                        return Err(format!("v-tree node {x} reached twice"));
                    }
                    seen[x] = true;
                    if l >= nodes.len() || r >= nodes.len() {
                        return Err(format!("v-tree node {x} has a child out of range"));
                    }
                    stack.push((x, true));
                    stack.push((r, false));
                    stack.push((l, false));
                }
            }
        }
        if order.len() != n_vars {
            return Err(format!("v-tree has {} leaves for {n_vars} variables", order.len()));
        }
        Ok(VTree { nodes, root, span, leaf_of, order })
    }

    pub fn nodes(&self) -> &[VNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, v: usize) -> VNode {
        self.nodes[v]
    }

    pub fn leaf_of(&self, var: usize) -> usize {
        self.leaf_of[var]
    }

    pub fn children(&self, v: usize) -> Option<(usize, usize)> {
        match self.nodes[v] {
            VNode::Internal(l, r) => Some((l, r)),
            VNode::Leaf(_) => None,
        }
    }

    /// Whether `u` lies in the subtree rooted at `v` (inclusive).
    pub fn contains(&self, v: usize, u: usize) -> bool {
        let (a, b) = self.span[v];
        let (c, d) = self.span[u];
        a <= c && d <= b
    }

    pub fn scope_len(&self, v: usize) -> usize {
        let (a, b) = self.span[v];
        b - a + 1
    }

    /// Variables under `v`, left to right.
    pub fn scope(&self, v: usize) -> &[usize] {
        let (a, b) = self.span[v];
        &self.order[a..=b]
    }

    /// All variables, left to right.
    pub fn in_order(&self) -> &[usize] {
        &self.order
    }
}

/// Incremental construction; leaves and internal nodes are appended.
#[derive(Debug, Default)]
pub struct VTreeBuilder {
    nodes: Vec<VNode>,
}

impl VTreeBuilder {
    pub fn leaf(&mut self, var: usize) -> usize {
        self.nodes.push(VNode::Leaf(var));
        self.nodes.len() - 1
    }

    pub fn internal(&mut self, l: usize, r: usize) -> usize {
        self.nodes.push(VNode::Internal(l, r));
        self.nodes.len() - 1
    }

    pub fn finish(self, root: usize, n_vars: usize) -> Result<VTree, String> {
        VTree::new(self.nodes, root, n_vars)
    }
}
