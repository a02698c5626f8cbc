use super::nice::{NiceKind, NiceTreeDecomposition};
use super::DecompError;
use crate::assignment::DecisionVariable;
use crate::graph::Graph;
use crate::mso::{Formula, Sort};

/// The forget node responsible for each vertex and each edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForgetOwnership {
    /// Indexed by vertex id minus one.
    pub vertex_owner: Vec<usize>,
    /// Indexed by edge id minus one.
    pub edge_owner: Vec<usize>,
}

/// An edge is owned by the forget node that drops one of its endpoints
/// while both are still in the child's label.
pub fn forget_ownership(g: &Graph, t: &NiceTreeDecomposition) -> Result<ForgetOwnership, DecompError> {
    let mut vertex_owner = vec![usize::MAX; g.n_vertices()];
    let mut edge_owner = vec![usize::MAX; g.n_edges()];
    for (p, node) in t.nodes().iter().enumerate() {
        let NiceKind::Forget(v) = node.kind else { continue };
        if vertex_owner[v as usize - 1] != usize::MAX {
            return Err(DecompError::NotNice(format!("vertex {v} forgotten twice")));
        }
        vertex_owner[v as usize - 1] = p;
        for e in forgotten_edges(g, t, p) {
            edge_owner[e as usize - 1] = p;
        }
    }
    if let Some(i) = vertex_owner.iter().position(|&o| o == usize::MAX) {
        return Err(DecompError::NeverForgotten(i as u32 + 1));
    }
    if let Some(i) = edge_owner.iter().position(|&o| o == usize::MAX) {
        return Err(DecompError::NotNice(format!("edge {} is never forgotten", i + 1)));
    }
    Ok(ForgetOwnership { vertex_owner, edge_owner })
}

/// Edge ids between the forgotten vertex and the rest of the child's label.
fn forgotten_edges(g: &Graph, t: &NiceTreeDecomposition, p: usize) -> Vec<u32> {
    let node = t.node(p);
    let NiceKind::Forget(v) = node.kind else { return Vec::new() };
    let child = t.node(node.children[0]);
    let mut edges: Vec<u32> = child
        .label
        .iter()
        .filter(|&&u| u != v)
        .filter_map(|&u| g.edge_id(u, v))
        .collect();
    edges.sort_unstable();
    edges
}

/// The decision variables handled at one forget node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub node: usize,
    pub forgotten_vertex: u32,
    /// Ascending edge ids.
    pub forgotten_edges: Vec<u32>,
    /// Vertex variables by declaration order, then per forgotten edge its
    /// variables by declaration order.
    pub variables: Vec<DecisionVariable>,
}

pub(crate) fn context_for_sorts(
    sorts: &[Sort],
    g: &Graph,
    t: &NiceTreeDecomposition,
    p: usize,
) -> Result<Context, DecompError> {
    let NiceKind::Forget(v) = t.node(p).kind else {
        return Err(DecompError::NotForget(p));
    };
    let edges = forgotten_edges(g, t, p);
    let mut variables = Vec::new();
    for (slot, &sort) in sorts.iter().enumerate() {
        if sort.on_vertices() {
            variables.push(DecisionVariable::for_sort(sort, slot, v));
        }
    }
    for &e in &edges {
        for (slot, &sort) in sorts.iter().enumerate() {
            if !sort.on_vertices() {
                variables.push(DecisionVariable::for_sort(sort, slot, e));
            }
        }
    }
    Ok(Context {
        node: p,
        forgotten_vertex: v,
        forgotten_edges: edges,
        variables,
    })
}

fn free_sorts(phi: &Formula) -> Vec<Sort> {
    phi.free_variables().iter().map(|v| v.sort).collect()
}

pub fn context_of(
    phi: &Formula,
    g: &Graph,
    t: &NiceTreeDecomposition,
    p: usize,
) -> Result<Context, DecompError> {
    context_for_sorts(&free_sorts(phi), g, t, p)
}

/// Contexts for every node, `None` for non-forget nodes.
pub fn all_contexts(phi: &Formula, g: &Graph, t: &NiceTreeDecomposition) -> Vec<Option<Context>> {
    let sorts = free_sorts(phi);
    (0..t.len())
        .map(|p| context_for_sorts(&sorts, g, t, p).ok())
        .collect()
}
