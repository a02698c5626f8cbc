use std::collections::{BTreeSet, VecDeque};
use std::fmt::{self, Write as _};

use super::DecompError;
use crate::graph::Graph;

/// An unrooted tree decomposition. Bags are 0-based internally; the `.td`
/// format numbers them from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<BTreeSet<u32>>,
    edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoBags,
    /// The bag graph has a cycle, is disconnected, or has a malformed edge.
    NotATree(String),
    VertexOutOfRange { bag: usize, vertex: u32 },
    EdgeNotCovered { edge: u32, u: u32, v: u32 },
    VertexMissing(u32),
    VertexDisconnected(u32),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoBags => write!(f, "decomposition has no bags"),
            Violation::NotATree(msg) => write!(f, "not a tree: {msg}"),
            Violation::VertexOutOfRange { bag, vertex } => {
                write!(f, "bag {} mentions unknown vertex {vertex}", bag + 1)
            }
            Violation::EdgeNotCovered { edge, u, v } => {
                write!(f, "edge {edge} = {{{u},{v}}} is not contained in any bag")
            }
            Violation::VertexMissing(v) => write!(f, "vertex {v} occurs in no bag"),
            Violation::VertexDisconnected(v) => {
                write!(f, "bags containing vertex {v} are not connected")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub width: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl TreeDecomposition {
    pub fn new(bags: Vec<BTreeSet<u32>>, edges: Vec<(usize, usize)>) -> TreeDecomposition {
        TreeDecomposition { bags, edges }
    }

    /// Convenience constructor from slices.
    pub fn from_bags(bags: &[&[u32]], edges: &[(usize, usize)]) -> TreeDecomposition {
        TreeDecomposition {
            bags: bags.iter().map(|b| b.iter().copied().collect()).collect(),
            edges: edges.to_vec(),
        }
    }

    pub fn bags(&self) -> &[BTreeSet<u32>] {
        &self.bags
    }

    pub fn tree_edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1)
    }

    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.edges {
            if a < self.bags.len() && b < self.bags.len() {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

pub fn validate_decomposition(g: &Graph, t: &TreeDecomposition) -> ValidationReport {
    let mut violations = Vec::new();
    let nb = t.bags.len();
    if nb == 0 {
        violations.push(Violation::NoBags);
    }
    if let Some(msg) = tree_problem(t) {
        violations.push(Violation::NotATree(msg));
    }
    for (i, bag) in t.bags.iter().enumerate() {
        for &v in bag {
            if v == 0 || v as usize > g.n_vertices() {
                violations.push(Violation::VertexOutOfRange { bag: i, vertex: v });
            }
        }
    }
    for (id, e) in g.edges() {
        if !t.bags.iter().any(|b| b.contains(&e.u) && b.contains(&e.v)) {
            violations.push(Violation::EdgeNotCovered { edge: id, u: e.u, v: e.v });
        }
    }
    let adj = t.adjacency();
    for v in g.vertices() {
        let holders: Vec<usize> = (0..nb).filter(|&i| t.bags[i].contains(&v)).collect();
        let Some(&start) = holders.first() else {
            violations.push(Violation::VertexMissing(v));
            continue;
        };
        let mut seen = vec![false; nb];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut reached = 1;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] && t.bags[y].contains(&v) {
                    seen[y] = true;
                    reached += 1;
                    queue.push_back(y);
                }
            }
        }
        if reached != holders.len() {
            violations.push(Violation::VertexDisconnected(v));
        }
    }
    ValidationReport {
        violations,
        width: t.width(),
    }
}

fn tree_problem(t: &TreeDecomposition) -> Option<String> {
    let nb = t.bags.len();
    if nb == 0 {
        return None;
    }
    for &(a, b) in &t.edges {
        if a >= nb || b >= nb {
            return Some(format!("edge {} {} names a missing bag", a + 1, b + 1));
        }
        if a == b {
            return Some(format!("bag {} is joined to itself", a + 1));
        }
    }
    if t.edges.len() != nb - 1 {
        return Some(format!("{} bags but {} tree edges", nb, t.edges.len()));
    }
    let adj = t.adjacency();
    let mut seen = vec![false; nb];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Some("bag graph is disconnected".into());
    }
    None
}

/// Tree decomposition from a greedy min-fill elimination ordering (ties go
/// to the smallest vertex id).
pub fn min_fill_decomposition(g: &Graph) -> Result<TreeDecomposition, DecompError> {
    let n = g.n_vertices();
    if n == 0 {
        return Err(DecompError::EmptyGraph);
    }
    let mut adj: Vec<BTreeSet<u32>> = g
        .neighbours()
        .into_iter()
        .map(|l| l.into_iter().collect())
        .collect();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    let mut bags = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, u32)> = None;
        for v in 1..=n as u32 {
            if !alive[v as usize - 1] {
                continue;
            }
            let fill = fill_in(&adj, v);
            if best.is_none_or(|(f, _)| fill < f) {
                best = Some((fill, v));
            }
        }
        let (_, v) = best.expect("an alive vertex remains");
        let nbrs: Vec<u32> = adj[v as usize - 1].iter().copied().collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                adj[a as usize - 1].insert(b);
                adj[b as usize - 1].insert(a);
            }
        }
        for &a in &nbrs {
            adj[a as usize - 1].remove(&v);
        }
        alive[v as usize - 1] = false;
        let mut bag: BTreeSet<u32> = nbrs.iter().copied().collect();
        bag.insert(v);
        bags.push(bag);
        order.push(v);
    }
    let mut position = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        position[v as usize - 1] = i;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for (i, &v) in order.iter().enumerate().take(n - 1) {
        let parent = bags[i]
            .iter()
            .filter(|&&u| u != v)
            .map(|&u| position[u as usize - 1])
            .min()
            .unwrap_or(i + 1);
        edges.push((i, parent));
    }
    Ok(TreeDecomposition { bags, edges })
}

fn fill_in(adj: &[BTreeSet<u32>], v: u32) -> usize {
    let nbrs: Vec<u32> = adj[v as usize - 1].iter().copied().collect();
    let mut missing = 0;
    for (i, &a) in nbrs.iter().enumerate() {
        for &b in &nbrs[i + 1..] {
            if !adj[a as usize - 1].contains(&b) {
                missing += 1;
            }
        }
    }
    missing
}

/// Path decomposition from a vertex order: bag `i` holds the `i`-th vertex
/// and every earlier vertex with a neighbour at position `i` or later.
pub fn path_decomposition_from_order(
    g: &Graph,
    order: &[u32],
) -> Result<TreeDecomposition, DecompError> {
    let n = g.n_vertices();
    if n == 0 {
        return Err(DecompError::EmptyGraph);
    }
    let mut position = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v == 0 || v as usize > n || position[v as usize - 1] != usize::MAX {
            return Err(DecompError::Invalid(format!(
                "vertex order is not a permutation of 1..={n}"
            )));
        }
        position[v as usize - 1] = i;
    }
    if order.len() != n {
        return Err(DecompError::Invalid(format!(
            "vertex order is not a permutation of 1..={n}"
        )));
    }
    let nbrs = g.neighbours();
    let last: Vec<usize> = (0..n)
        .map(|i| {
            nbrs[i]
                .iter()
                .map(|&u| position[u as usize - 1])
                .chain([position[i]])
                .max()
                .unwrap()
        })
        .collect();
    let bags: Vec<BTreeSet<u32>> = (0..n)
        .map(|i| {
            order[..=i]
                .iter()
                .copied()
                .filter(|&u| u == order[i] || last[u as usize - 1] >= i)
                .collect()
        })
        .collect();
    let edges = (1..n).map(|i| (i - 1, i)).collect();
    Ok(TreeDecomposition { bags, edges })
}

/// Path decomposition following vertex id order.
pub fn id_order_path_decomposition(g: &Graph) -> Result<TreeDecomposition, DecompError> {
    let order: Vec<u32> = g.vertices().collect();
    path_decomposition_from_order(g, &order)
}

/// Parse the `.td` format.
pub fn parse_decomposition(text: &str) -> Result<TreeDecomposition, DecompError> {
    let err = |line: usize, msg: String| DecompError::Parse { line, msg };
    let mut header: Option<(usize, usize)> = None;
    let mut bags: Vec<Option<BTreeSet<u32>>> = Vec::new();
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let num = |s: &str| -> Result<usize, DecompError> {
            s.parse()
                .map_err(|_| err(line, format!("`{s}` is not a non-negative integer")))
        };
        let Some((n_bags, _)) = header else {
            if fields.len() != 5 || fields[0] != "s" || fields[1] != "td" {
                return Err(err(
                    line,
                    format!("expected `s td <bags> <max bag> <vertices>`, found `{trimmed}`"),
                ));
            }
            let n_bags = num(fields[2])?;
            let max_bag = num(fields[3])?;
            num(fields[4])?;
            header = Some((n_bags, max_bag));
            bags = vec![None; n_bags];
            continue;
        };
        if fields[0] == "b" {
            if fields.len() < 2 {
                return Err(err(line, "bag line without an id".into()));
            }
            let id = num(fields[1])?;
            if id == 0 || id > n_bags {
                return Err(err(line, format!("bag id {id} outside 1..={n_bags}")));
            }
            if bags[id - 1].is_some() {
                return Err(err(line, format!("bag {id} defined twice")));
            }
            let mut bag = BTreeSet::new();
            for f in &fields[2..] {
                let v = num(f)?;
                if v == 0 || v > u32::MAX as usize {
                    return Err(err(line, format!("invalid vertex `{f}`")));
                }
                bag.insert(v as u32);
            }
            bags[id - 1] = Some(bag);
        } else {
            if fields.len() != 2 {
                return Err(err(line, format!("expected `<bag> <bag>`, found `{trimmed}`")));
            }
            let (a, b) = (num(fields[0])?, num(fields[1])?);
            for x in [a, b] {
                if x == 0 || x > n_bags {
                    return Err(err(line, format!("tree edge names missing bag {x}")));
                }
            }
            edges.push((a - 1, b - 1));
        }
    }
    let Some((_, max_bag)) = header else {
        return Err(err(0, "missing `s td` header".into()));
    };
    let bags: Vec<BTreeSet<u32>> = bags
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| err(0, format!("bag {} never defined", i + 1))))
        .collect::<Result<_, _>>()?;
    let actual = bags.iter().map(|b| b.len()).max().unwrap_or(0);
    if actual != max_bag {
        return Err(err(
            0,
            format!("header declares max bag size {max_bag}, largest bag has {actual}"),
        ));
    }
    Ok(TreeDecomposition { bags, edges })
}

pub fn serialize_decomposition(t: &TreeDecomposition, n_vertices: usize) -> String {
    let max = t.bags.iter().map(|b| b.len()).max().unwrap_or(0);
    let mut out = format!("s td {} {} {}\n", t.bags.len(), max, n_vertices);
    for (i, bag) in t.bags.iter().enumerate() {
        let _ = write!(out, "b {}", i + 1);
        for v in bag {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    for &(a, b) in &t.edges {
        let _ = writeln!(out, "{} {}", a + 1, b + 1);
    }
    out
}
