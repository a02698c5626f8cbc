use std::fmt::Write as _;

use crate::assignment::DecisionVariable;
use crate::graph::Graph;

/// Positive literals only; indices into [`Cnf::vars`].
pub type Clause = Vec<usize>;

/// Vertex-or-edge cover constraints: one variable per vertex and per edge,
/// one clause per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    /// Vertex variables `[v∈XV]` first, then edge variables `[e∈XE]`; this
    /// is also the decision-variable order of the vertex-cover formula.
    pub vars: Vec<DecisionVariable>,
    pub clauses: Vec<Clause>,
}

impl Cnf {
    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn satisfied(&self, bits: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&x| bits[x]))
    }

    /// DIMACS text; variable `i` is written as `i + 1`.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.vars.len(), self.clauses.len());
        for c in &self.clauses {
            for &x in c {
                let _ = write!(out, "{} ", x + 1);
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Clause `x_u ∨ x_e ∨ x_v` for every edge `e = {u, v}`.
pub fn cnf_of_graph(g: &Graph) -> Cnf {
    let nv = g.n_vertices();
    let mut vars: Vec<DecisionVariable> =
        g.vertices().map(|vertex| DecisionVariable::VertexIn { vertex, slot: 0 }).collect();
    vars.extend(g.edges().map(|(edge, _)| DecisionVariable::EdgeIn { edge, slot: 1 }));
    let clauses = g
        .edges()
        .map(|(id, e)| vec![e.u as usize - 1, nv + id as usize - 1, e.v as usize - 1])
        .collect();
    Cnf { vars, clauses }
}

/// Variable order placing each vertex as listed and each edge right after
/// its later endpoint.
pub fn cnf_order_from_vertex_order(g: &Graph, vertex_order: &[u32]) -> Vec<usize> {
    let nv = g.n_vertices();
    let mut pos = vec![0usize; nv + 1];
    for (i, &v) in vertex_order.iter().enumerate() {
        pos[v as usize] = i;
    }
    let mut after: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (id, e) in g.edges() {
        let last = pos[e.u as usize].max(pos[e.v as usize]);
        after[last].push(nv + id as usize - 1);
    }
    let mut order = Vec::with_capacity(nv + g.n_edges());
    for (i, &v) in vertex_order.iter().enumerate() {
        order.push(v as usize - 1);
        order.extend(&after[i]);
    }
    order
}

/// Vertices of `K_k ⊠ T_r` grouped by tree node, tree nodes in depth-first
/// preorder.
pub fn tree_grouped_vertex_order(k: usize, r: u32) -> Vec<u32> {
    let nt = (1u32 << r) - 1;
    let mut out = Vec::with_capacity(k * nt as usize);
    let mut stack = vec![1u32];
    while let Some(b) = stack.pop() {
        out.extend((1..=k as u32).map(|a| (a - 1) * nt + b));
        for c in [2 * b + 1, 2 * b] {
            if c <= nt {
                stack.push(c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{clique, clique_tree, path};

    #[test]
    fn shapes() {
        let c = cnf_of_graph(&clique(1).unwrap());
        assert_eq!((c.n_vars(), c.clauses.len()), (1, 0));
        let c = cnf_of_graph(&path(2).unwrap());
        assert_eq!((c.n_vars(), c.clauses.len()), (3, 1));
        assert_eq!(c.to_dimacs(), "p cnf 3 1\n1 3 2 0\n");
    }

    #[test]
    fn order_is_a_permutation() {
        let g = clique_tree(2, 3).unwrap();
        let vo = tree_grouped_vertex_order(2, 3);
        let mut sorted = vo.clone();
        sorted.sort();
        assert_eq!(sorted, (1..=14).collect::<Vec<_>>());
        let mut o = cnf_order_from_vertex_order(&g, &vo);
        o.sort();
        assert_eq!(o, (0..g.size()).collect::<Vec<_>>());
    }
}
