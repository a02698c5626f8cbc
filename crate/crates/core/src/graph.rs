//! Simple undirected graphs with 1-based vertex and edge ids.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: endpoint {vertex} outside 1..={n}")]
    EndpointOutOfRange { line: usize, vertex: u64, n: usize },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: u32 },
    #[error("line {line}: duplicate edge {{{u},{v}}}")]
    DuplicateEdge { line: usize, u: u32, v: u32 },
    #[error("expected {expected} edges, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error("{0}")]
    Invalid(String),
}

/// An undirected edge; `u < v` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
}

impl Edge {
    pub fn new(a: u32, b: u32) -> Edge {
        if a < b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn contains(&self, x: u32) -> bool {
        self.u == x || self.v == x
    }

    /// The endpoint that is not `x`.
    pub fn other(&self, x: u32) -> u32 {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<Edge>,
    index: HashMap<Edge, u32>,
}

impl Graph {
    pub fn new(n_vertices: usize, edges: &[(u32, u32)]) -> Result<Graph, GraphError> {
        let mut g = Graph::empty(n_vertices);
        for (i, &(a, b)) in edges.iter().enumerate() {
            g.push_edge(i + 1, a as u64, b as u64)?;
        }
        Ok(g)
    }

    pub fn empty(n_vertices: usize) -> Graph {
        Graph {
            n_vertices,
            edges: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn push_edge(&mut self, line: usize, a: u64, b: u64) -> Result<(), GraphError> {
        for x in [a, b] {
            if x == 0 || x > self.n_vertices as u64 {
                return Err(GraphError::EndpointOutOfRange {
                    line,
                    vertex: x,
                    n: self.n_vertices,
                });
            }
        }
        let (a, b) = (a as u32, b as u32);
        if a == b {
            return Err(GraphError::SelfLoop { line, vertex: a });
        }
        let e = Edge::new(a, b);
        if self.index.contains_key(&e) {
            return Err(GraphError::DuplicateEdge { line, u: e.u, v: e.v });
        }
        self.edges.push(e);
        self.index.insert(e, self.edges.len() as u32);
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// `|V| + |E|`, the size measure used by all bounds.
    pub fn size(&self) -> usize {
        self.n_vertices + self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = u32> {
        1..=self.n_vertices as u32
    }

    /// Edge with the given 1-based id.
    pub fn edge(&self, id: u32) -> Edge {
        self.edges[id as usize - 1]
    }

    /// `(id, edge)` pairs in id order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, Edge)> + '_ {
        self.edges.iter().enumerate().map(|(i, &e)| (i as u32 + 1, e))
    }

    pub fn edge_id(&self, a: u32, b: u32) -> Option<u32> {
        if a == b {
            return None;
        }
        self.index.get(&Edge::new(a, b)).copied()
    }

    pub fn adjacent(&self, a: u32, b: u32) -> bool {
        self.edge_id(a, b).is_some()
    }

    /// Sorted neighbour lists, indexed by `vertex - 1`.
    pub fn neighbours(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for e in &self.edges {
            adj[e.u as usize - 1].push(e.v);
            adj[e.v as usize - 1].push(e.u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// Parse the `.gr` format: `p gr N M`, then one `u v` line per edge.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut graph: Option<Graph> = None;
    let mut declared_edges = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match graph.as_mut() {
            None => {
                if fields.len() != 4 || fields[0] != "p" || fields[1] != "gr" {
                    return Err(GraphError::Malformed {
                        line,
                        msg: format!("expected header `p gr <n> <m>`, found `{trimmed}`"),
                    });
                }
                let n = parse_count(fields[2], line)?;
                declared_edges = parse_count(fields[3], line)?;
                graph = Some(Graph::empty(n));
            }
            Some(g) => {
                if fields.len() != 2 {
                    return Err(GraphError::Malformed {
                        line,
                        msg: format!("expected `<u> <v>`, found `{trimmed}`"),
                    });
                }
                let a = parse_count(fields[0], line)? as u64;
                let b = parse_count(fields[1], line)? as u64;
                g.push_edge(line, a, b)?;
            }
        }
    }
    let g = graph.ok_or(GraphError::Malformed {
        line: 0,
        msg: "missing `p gr` header".into(),
    })?;
    if g.n_edges() != declared_edges {
        return Err(GraphError::EdgeCount {
            expected: declared_edges,
            found: g.n_edges(),
        });
    }
    Ok(g)
}

fn parse_count(field: &str, line: usize) -> Result<usize, GraphError> {
    field.parse().map_err(|_| GraphError::Malformed {
        line,
        msg: format!("`{field}` is not a non-negative integer"),
    })
}

pub fn serialize_graph(g: &Graph) -> String {
    let mut out = format!("p gr {} {}\n", g.n_vertices, g.n_edges());
    for (_, e) in g.edges() {
        let _ = writeln!(out, "{} {}", e.u, e.v);
    }
    out
}

pub fn clique(k: usize) -> Result<Graph, GraphError> {
    if k == 0 {
        return Err(GraphError::Invalid("clique needs k >= 1".into()));
    }
    let mut edges = Vec::new();
    for a in 1..=k as u32 {
        for b in a + 1..=k as u32 {
            edges.push((a, b));
        }
    }
    Graph::new(k, &edges)
}

pub fn path(n: usize) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::Invalid("path needs n >= 1".into()));
    }
    let edges: Vec<_> = (1..n as u32).map(|i| (i, i + 1)).collect();
    Graph::new(n, &edges)
}

pub fn cycle(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::Invalid("cycle needs n >= 3".into()));
    }
    let mut edges: Vec<_> = (1..n as u32).map(|i| (i, i + 1)).collect();
    edges.push((1, n as u32));
    Graph::new(n, &edges)
}

/// Star with centre 1 and `leaves` leaves.
pub fn star(leaves: usize) -> Result<Graph, GraphError> {
    let edges: Vec<_> = (2..=leaves as u32 + 1).map(|i| (1, i)).collect();
    Graph::new(leaves + 1, &edges)
}

/// Complete binary tree of height `r` in heap numbering: vertex `i` has
/// children `2i` and `2i + 1`.
pub fn complete_binary_tree(r: u32) -> Result<Graph, GraphError> {
    if r == 0 || r > 24 {
        return Err(GraphError::Invalid(format!("tree height {r} outside 1..=24")));
    }
    let n = (1usize << r) - 1;
    let edges: Vec<_> = (2..=n as u32).map(|i| (i / 2, i)).collect();
    Graph::new(n, &edges)
}

/// Strong product: `(a,b)` gets id `(a-1)|V_H| + b`; edges are listed in
/// lexicographic order of their endpoint ids.
pub fn full_product(g: &Graph, h: &Graph) -> Result<Graph, GraphError> {
    if g.n_vertices == 0 || h.n_vertices == 0 {
        return Err(GraphError::Invalid("product of an empty graph".into()));
    }
    let nh = h.n_vertices as u32;
    let n = g.n_vertices * h.n_vertices;
    let split = |id: u32| ((id - 1) / nh + 1, (id - 1) % nh + 1);
    let mut edges = Vec::new();
    for p in 1..=n as u32 {
        let (a, b) = split(p);
        for q in p + 1..=n as u32 {
            let (c, d) = split(q);
            let ga = g.adjacent(a, c);
            let hb = h.adjacent(b, d);
            if (ga && b == d) || (a == c && hb) || (ga && hb) {
                edges.push((p, q));
            }
        }
    }
    Graph::new(n, &edges)
}

/// `K_k ⊠ T_r`.
pub fn clique_tree(k: usize, r: u32) -> Result<Graph, GraphError> {
    full_product(&clique(k)?, &complete_binary_tree(r)?)
}
