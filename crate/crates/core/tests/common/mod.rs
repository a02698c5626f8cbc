#![allow(dead_code)]

use mso2dd::assignment::Legend;
use mso2dd::graph::{clique, clique_tree, cycle, path, star, Graph};
use mso2dd::mso::{parse_formula, Formula};

/// Largest number of decision variables an instance may have.
pub const MAX_DECISION_VARS: usize = 14;

pub const FORMULAS: &[(&str, &str)] = &[
    ("equal", "free vertex x; free vertex y; (x = y)"),
    ("member", "free vertex x; free vset X; (x in X)"),
    ("adjacent", "free vertex x; free edge p; adj(x, p)"),
    ("not-adjacent", "free vertex x; free edge p; ~adj(x, p)"),
    ("edge-relation", "free edge e; free vertex u; free vertex v; edge(e, u, v)"),
    ("set-tautology", "exists vset X. ~(exists vertex v. (~(v in X) & (v in X)))"),
    (
        "cover",
        "free vset XV; free eset XE; forall edge e. forall vertex u. forall vertex v. \
         ((((u != v) & adj(u, e)) & adj(v, e)) -> (((u in XV) | (v in XV)) | (e in XE)))",
    ),
    ("dominating", "free vset S; forall vertex u. exists vertex v. (((u = v) | nbr(u, v)) & (v in S))"),
];

pub fn graphs() -> Vec<(&'static str, Graph)> {
    vec![
        ("K1", clique(1).unwrap()),
        ("P2", path(2).unwrap()),
        ("P3", path(3).unwrap()),
        ("P4", path(4).unwrap()),
        ("K3", clique(3).unwrap()),
        ("C4", cycle(4).unwrap()),
        ("S3", star(3).unwrap()),
        ("KT22", clique_tree(2, 2).unwrap()),
        ("K4", clique(4).unwrap()),
        ("2K2", Graph::new(4, &[(1, 2), (3, 4)]).unwrap()),
        ("paw", Graph::new(4, &[(1, 2), (2, 3), (1, 3), (3, 4)]).unwrap()),
        ("E2", Graph::empty(2)),
    ]
}

pub struct Case {
    pub name: String,
    pub formula: Formula,
    pub graph: Graph,
}

/// Every formula on every graph with at most [`MAX_DECISION_VARS`]
/// decision variables.
pub fn corpus() -> Vec<Case> {
    let mut out = Vec::new();
    for (gname, g) in graphs() {
        for (fname, src) in FORMULAS {
            let formula = parse_formula(src).unwrap();
            if Legend::new(&formula, &g).decision_count() <= MAX_DECISION_VARS {
                out.push(Case { name: format!("{fname} on {gname}"), formula, graph: g.clone() });
            }
        }
    }
    out
}

/// All assignments to `n` bits, bit `i` of the index giving position `i`.
pub fn all_bits(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1u64 << n).map(move |a| (0..n).map(|i| a >> i & 1 == 1).collect())
}

/// Minimum vertex cover size by trying every vertex subset.
pub fn brute_force_vertex_cover(g: &Graph) -> usize {
    let n = g.n_vertices();
    (0..1u64 << n)
        .filter(|s| g.edges().all(|(_, e)| s >> (e.u - 1) & 1 == 1 || s >> (e.v - 1) & 1 == 1))
        .map(|s| s.count_ones() as usize)
        .min()
        .unwrap()
}
