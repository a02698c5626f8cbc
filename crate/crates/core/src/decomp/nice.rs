use std::collections::BTreeSet;

use super::tree::{validate_decomposition, TreeDecomposition};
use super::DecompError;
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NiceKind {
    Leaf,
    Introduce(u32),
    Forget(u32),
    Join,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceNode {
    pub kind: NiceKind,
    /// Sorted bag contents.
    pub label: Vec<u32>,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
}

/// Rooted nice tree decomposition. Children always have smaller indices
/// than their parent, so iterating by index is a bottom-up traversal and the
/// root is the last node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceTreeDecomposition {
    nodes: Vec<NiceNode>,
}

impl NiceTreeDecomposition {
    /// Build from raw nodes, re-deriving kinds and renumbering so children precede
    /// parents. `children[i]` lists the children of node `i`; `root` is the root.
    pub fn from_labels(
        labels: Vec<Vec<u32>>,
        children: Vec<Vec<usize>>,
        root: usize,
    ) -> Result<NiceTreeDecomposition, DecompError> {
        let n = labels.len();
        if root >= n || children.len() != n {
            return Err(DecompError::NotNice("root or child lists out of range".into()));
        }
        // Iterative post-order from the root.
        let mut order = Vec::with_capacity(n);
        let mut visited = vec![false; n];
        let mut stack = vec![(root, false)];
        while let Some((x, expanded)) = stack.pop() {
            if expanded {
                order.push(x);
                continue;
            }
            if visited[x] {
                return Err(DecompError::NotNice(format!("node {x} reached twice")));
            }
            visited[x] = true;
            stack.push((x, true));
            for &c in children[x].iter().rev() {
                if c >= n {
                    return Err(DecompError::NotNice(format!("child {c} out of range")));
                }
                stack.push((c, false));
            }
        }
        if order.len() != n {
            return Err(DecompError::NotNice("nodes unreachable from the root".into()));
        }
        let mut new_id = vec![0; n];
        for (i, &x) in order.iter().enumerate() {
            new_id[x] = i;
        }
        let mut nodes: Vec<NiceNode> = order
            .iter()
            .map(|&x| NiceNode {
                kind: NiceKind::Leaf,
                label: {
                    let mut l = labels[x].clone();
                    l.sort_unstable();
                    l.dedup();
                    l
                },
                children: children[x].iter().map(|&c| new_id[c]).collect(),
                parent: None,
            })
            .collect();
        for i in 0..n {
            for c in nodes[i].children.clone() {
                nodes[c].parent = Some(i);
            }
            nodes[i].kind = derive_kind(&nodes, i)?;
        }
        Ok(NiceTreeDecomposition { nodes })
    }

    pub fn nodes(&self) -> &[NiceNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &NiceNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn width(&self) -> usize {
        self.nodes.iter().map(|n| n.label.len()).max().unwrap_or(0).saturating_sub(1)
    }

    /// Distance from the root for every node.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.nodes.len()];
        for i in (0..self.nodes.len()).rev() {
            if let Some(p) = self.nodes[i].parent {
                depth[i] = depth[p] + 1;
            }
        }
        depth
    }

    pub fn to_tree_decomposition(&self) -> TreeDecomposition {
        let bags = self
            .nodes
            .iter()
            .map(|n| n.label.iter().copied().collect())
            .collect();
        let edges = self
            .nodes
            .iter()
            .enumerate()
            .flat_map(|(i, n)| n.children.iter().map(move |&c| (c, i)))
            .collect();
        TreeDecomposition::new(bags, edges)
    }
}

fn derive_kind(nodes: &[NiceNode], i: usize) -> Result<NiceKind, DecompError> {
    let node = &nodes[i];
    match node.children.as_slice() {
        [] => Ok(NiceKind::Leaf),
        [c] => {
            let child = &nodes[*c].label;
            let (p, q): (BTreeSet<u32>, BTreeSet<u32>) = (
                node.label.iter().copied().collect(),
                child.iter().copied().collect(),
            );
            let added: Vec<u32> = p.difference(&q).copied().collect();
            let dropped: Vec<u32> = q.difference(&p).copied().collect();
            match (added.as_slice(), dropped.as_slice()) {
                ([v], []) => Ok(NiceKind::Introduce(*v)),
                ([], [v]) => Ok(NiceKind::Forget(*v)),
                _ => Err(DecompError::NotNice(format!(
                    "node {i} differs from its child by more than one vertex"
                ))),
            }
        }
        [a, b] => {
            if nodes[*a].label == node.label && nodes[*b].label == node.label {
                Ok(NiceKind::Join)
            } else {
                Err(DecompError::NotNice(format!(
                    "join node {i} has children with different labels"
                )))
            }
        }
        _ => Err(DecompError::NotNice(format!("node {i} has more than two children"))),
    }
}

/// Every violated nice-decomposition property, as readable messages.
pub fn check_nice(g: &Graph, t: &NiceTreeDecomposition) -> Vec<String> {
    let mut problems: Vec<String> = validate_decomposition(g, &t.to_tree_decomposition())
        .violations
        .iter()
        .map(|v| v.to_string())
        .collect();
    if t.is_empty() {
        problems.push("no nodes".into());
        return problems;
    }
    if !t.node(t.root()).label.is_empty() {
        problems.push("root label is not empty".into());
    }
    for (i, node) in t.nodes.iter().enumerate() {
        match derive_kind(&t.nodes, i) {
            Ok(kind) if kind == node.kind => {}
            Ok(kind) => problems.push(format!("node {i} is {kind:?} but tagged {:?}", node.kind)),
            Err(e) => problems.push(e.to_string()),
        }
        for &c in &node.children {
            if c >= i || t.nodes[c].parent != Some(i) {
                problems.push(format!("node {i} has inconsistent child {c}"));
            }
        }
    }
    problems
}

pub fn is_path_decomposition(t: &NiceTreeDecomposition) -> bool {
    t.nodes.iter().all(|n| n.kind != NiceKind::Join)
}

/// Convert a valid tree decomposition into a nice one of the same width.
///
/// Bags that are subsets of a neighbour are contracted first. The tree is then
/// rooted (at an end bag when it is a path) and walked top-down from an empty
/// root label. Entering a bag adds its missing vertices in ascending order;
/// a vertex not needed further down is dropped only when the label is full.
/// Multi-child bags are binarized left to right. Each vertex is added once and
/// each drop makes room for one add, which keeps the node count below `4|V|`.
pub fn make_nice(g: &Graph, t: &TreeDecomposition) -> Result<NiceTreeDecomposition, DecompError> {
    if g.n_vertices() == 0 {
        return Err(DecompError::EmptyGraph);
    }
    let report = validate_decomposition(g, t);
    if !report.is_valid() {
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(DecompError::Invalid(msgs.join("; ")));
    }
    let capacity = report.width + 1;
    let (bags, adj) = contract(t);
    let alive: Vec<usize> = (0..bags.len()).filter(|&i| adj[i].is_some()).collect();
    let degree = |i: usize| adj[i].as_ref().map_or(0, |s| s.len());
    let is_path = alive.iter().all(|&i| degree(i) <= 2);
    let root_bag = if is_path {
        *alive.iter().find(|&&i| degree(i) <= 1).expect("a path has an end")
    } else {
        alive[0]
    };

    let mut labels: Vec<BTreeSet<u32>> = vec![BTreeSet::new()];
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut push = |labels: &mut Vec<BTreeSet<u32>>, parent: usize, label: BTreeSet<u32>| {
        labels.push(label);
        children.push(Vec::new());
        let id = labels.len() - 1;
        children[parent].push(id);
        id
    };
    // (bag, its parent bag, temp node whose label is the current label)
    let mut work = vec![(root_bag, usize::MAX, 0usize)];
    while let Some((x, from, mut at)) = work.pop() {
        let bag = &bags[x];
        let missing: Vec<u32> = bag.difference(&labels[at]).copied().collect();
        for v in missing {
            if labels[at].len() == capacity {
                let drop = *labels[at]
                    .iter()
                    .find(|u| !bag.contains(u))
                    .expect("a full label holds a vertex outside the next bag");
                let mut next = labels[at].clone();
                next.remove(&drop);
                at = push(&mut labels, at, next);
            }
            let mut next = labels[at].clone();
            next.insert(v);
            at = push(&mut labels, at, next);
        }
        let kids: Vec<usize> = adj[x]
            .as_ref()
            .unwrap()
            .iter()
            .copied()
            .filter(|&y| y != from)
            .collect();
        let m = kids.len();
        if m == 1 {
            work.push((kids[0], x, at));
        } else if m >= 2 {
            let label = labels[at].clone();
            let mut join = at;
            let mut branches = Vec::with_capacity(m);
            for i in 0..m - 1 {
                branches.push(push(&mut labels, join, label.clone()));
                if i == m - 2 {
                    branches.push(push(&mut labels, join, label.clone()));
                } else {
                    join = push(&mut labels, join, label.clone());
                }
            }
            // Reverse so the leftmost branch is expanded first.
            for (&kid, &start) in kids.iter().zip(&branches).rev() {
                work.push((kid, x, start));
            }
        }
    }
    let labels = labels.into_iter().map(|l| l.into_iter().collect()).collect();
    NiceTreeDecomposition::from_labels(labels, children, 0)
}

/// Repeatedly merge a bag into a neighbour that contains it. Returns the bags
/// and, per surviving bag, its sorted neighbour set (`None` once merged away).
fn contract(t: &TreeDecomposition) -> (Vec<BTreeSet<u32>>, Vec<Option<BTreeSet<usize>>>) {
    let bags = t.bags().to_vec();
    let mut adj: Vec<Option<BTreeSet<usize>>> = t
        .adjacency()
        .into_iter()
        .map(|l| Some(l.into_iter().collect()))
        .collect();
    loop {
        let mut merge = None;
        'search: for a in 0..bags.len() {
            let Some(na) = &adj[a] else { continue };
            for &b in na {
                if bags[a].is_subset(&bags[b]) {
                    merge = Some((a, b));
                    break 'search;
                }
            }
        }
        let Some((a, b)) = merge else { break };
        let na = adj[a].take().unwrap();
        for c in na {
            let nc = adj[c].as_mut().unwrap();
            nc.remove(&a);
            if c != b {
                nc.insert(b);
                adj[b].as_mut().unwrap().insert(c);
            }
        }
    }
    (bags, adj)
}
