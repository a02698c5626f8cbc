use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{build_state_space, with_consistency, Machine, Signature, StateError, StateSpace};
use crate::assignment::{BooleanAssignment, DecisionVariable, Legend};
use crate::decomp::{
    all_contexts, check_nice, good_coloring, Coloring, Context, DecompError, NiceKind,
    NiceTreeDecomposition,
};
use crate::graph::Graph;
use crate::mso::{desugar, formula_size, Formula};

/// What a forget node's transition needs to know about the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForgetInfo {
    pub node: usize,
    pub vertex: u32,
    pub vertex_color: u32,
    /// Forgotten edges in context order, with the other endpoint's color.
    pub edges: Vec<(u32, u32)>,
    pub context: Context,
    /// Per context variable: the formula variable it belongs to and its bit
    /// in that variable's valuation mask.
    pub bindings: Vec<(usize, u64)>,
}

impl ForgetInfo {
    pub fn signature(&self) -> Signature {
        Signature {
            vertex_color: self.vertex_color,
            edge_colors: self.edges.iter().map(|e| e.1).collect(),
        }
    }
}

/// Everything fixed for one formula, graph and decomposition: the core
/// formula, the coloring, contexts, and the consistency-extended space.
#[derive(Debug, Clone)]
pub struct Instance {
    formula: Formula,
    graph: Graph,
    td: NiceTreeDecomposition,
    coloring: Coloring,
    legend: Legend,
    infos: Vec<Option<ForgetInfo>>,
    ctx_positions: Vec<Vec<usize>>,
    space: StateSpace,
}

/// States reachable at each decomposition node over all assignments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reachability {
    /// Ascending ids per node.
    pub per_node: Vec<Vec<u32>>,
    /// Union over all nodes, ascending.
    pub all: Vec<u32>,
}

impl Reachability {
    pub fn size(&self) -> usize {
        self.all.len()
    }
}

impl Instance {
    pub fn new(phi: &Formula, g: &Graph, td: NiceTreeDecomposition) -> Result<Instance, StateError> {
        let c = good_coloring(g, &td)?;
        Instance::with_coloring(phi, g, td, c)
    }

    /// `phi` is desugared first; `c` must be good for `td`.
    pub fn with_coloring(
        phi: &Formula,
        g: &Graph,
        td: NiceTreeDecomposition,
        c: Coloring,
    ) -> Result<Instance, StateError> {
        let problems = check_nice(g, &td);
        if !problems.is_empty() {
            return Err(DecompError::NotNice(problems.join("; ")).into());
        }
        if c.colors().len() != g.n_vertices() || !c.is_good(&td) {
            return Err(StateError::BadColoring);
        }
        let formula = desugar(phi);
        let legend = Legend::new(&formula, g);
        let free = formula.free_ids().to_vec();
        let contexts = all_contexts(&formula, g, &td);
        let mut infos = Vec::with_capacity(td.len());
        let mut ctx_positions = Vec::with_capacity(td.len());
        for ctx in contexts {
            let Some(ctx) = ctx else {
                infos.push(None);
                ctx_positions.push(Vec::new());
                continue;
            };
            let v = ctx.forgotten_vertex;
            let edges: Vec<(u32, u32)> = ctx
                .forgotten_edges
                .iter()
                .map(|&e| (e, c.color(g.edge(e).other(v))))
                .collect();
            let bindings = ctx
                .variables
                .iter()
                .map(|d| {
                    let var = free[d.slot().unwrap()].index();
                    let bit = match *d {
                        DecisionVariable::EdgeEq { edge, .. } | DecisionVariable::EdgeIn { edge, .. } => {
                            1u64 << ctx.forgotten_edges.iter().position(|&e| e == edge).unwrap()
                        }
                        _ => 1,
                    };
                    (var, bit)
                })
                .collect();
            ctx_positions.push(
                ctx.variables
                    .iter()
                    .map(|d| legend.index_of(d).expect("context variable in legend"))
                    .collect(),
            );
            infos.push(Some(ForgetInfo {
                node: ctx.node,
                vertex: v,
                vertex_color: c.color(v),
                edges,
                context: ctx,
                bindings,
            }));
        }
        let space = with_consistency(&build_state_space(&formula, td.width())?, &formula)?;
        Ok(Instance {
            formula,
            graph: g.clone(),
            td,
            coloring: c,
            legend,
            infos,
            ctx_positions,
            space,
        })
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn decomposition(&self) -> &NiceTreeDecomposition {
        &self.td
    }

    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }

    /// The decision variables, without dummies.
    pub fn legend(&self) -> &Legend {
        &self.legend
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn info(&self, p: usize) -> Option<&ForgetInfo> {
        self.infos[p].as_ref()
    }

    /// Legend positions of the context variables of node `p`, in context order.
    pub fn context_positions(&self, p: usize) -> &[usize] {
        &self.ctx_positions[p]
    }

    pub fn width(&self) -> usize {
        self.td.width()
    }

    /// `|V| + |E|`.
    pub fn n(&self) -> usize {
        self.graph.size()
    }

    pub fn formula_size(&self) -> usize {
        formula_size(&self.formula)
    }

    /// Width plus formula size.
    pub fn k(&self) -> usize {
        self.width() + self.formula_size()
    }

    pub fn machine(&self) -> Machine<'_> {
        Machine::new(&self.space)
    }

    /// Forget transition at node `p` given values for its context in order.
    pub fn forget(&self, m: &mut Machine, p: usize, s: u32, ctx_bits: &[bool]) -> u32 {
        let info = self.infos[p].as_ref().expect("forget node");
        let sig = m.signature(&info.signature());
        let mut masks = vec![0u64; self.space.n_vars()];
        for (&(var, bit), &on) in info.bindings.iter().zip(ctx_bits) {
            if on {
                masks[var] |= bit;
            }
        }
        m.forget(self.space.root(), s, sig, &mut masks)
    }

    pub fn join(&self, m: &mut Machine, l: u32, r: u32) -> u32 {
        m.join(self.space.root(), l, r)
    }

    /// State of every decomposition node for the decision-variable values
    /// `bits`, indexed like the legend.
    pub fn node_states(&self, m: &mut Machine, bits: &[bool]) -> Vec<u32> {
        let root = self.space.root();
        let mut states = vec![0u32; self.td.len()];
        let mut ctx = Vec::new();
        for (p, node) in self.td.nodes().iter().enumerate() {
            states[p] = match node.kind {
                NiceKind::Leaf => m.initial(root),
                NiceKind::Introduce(_) => states[node.children[0]],
                NiceKind::Forget(_) => {
                    ctx.clear();
                    ctx.extend(self.ctx_positions[p].iter().map(|&i| bits[i]));
                    self.forget(m, p, states[node.children[0]], &ctx)
                }
                NiceKind::Join => self.join(m, states[node.children[0]], states[node.children[1]]),
            };
        }
        states
    }

    pub fn run_bits(&self, m: &mut Machine, bits: &[bool]) -> u32 {
        *self.node_states(m, bits).last().unwrap()
    }

    pub fn accepts_bits(&self, m: &mut Machine, bits: &[bool]) -> bool {
        let s = self.run_bits(m, bits);
        m.accepting(self.space.root(), s)
    }

    pub fn accepts(&self, m: &mut Machine, delta: &BooleanAssignment) -> Result<bool, StateError> {
        let bits = self.legend.bits_of(delta)?;
        Ok(self.accepts_bits(m, &bits))
    }

    /// Exact image of every node's state function: contexts are disjoint, so
    /// every combination of context values is realized.
    pub fn reachable(&self, m: &mut Machine) -> Reachability {
        let root = self.space.root();
        let mut per_node: Vec<Vec<u32>> = Vec::with_capacity(self.td.len());
        for (p, node) in self.td.nodes().iter().enumerate() {
            let states: Vec<u32> = match node.kind {
                NiceKind::Leaf => vec![m.initial(root)],
                NiceKind::Introduce(_) => per_node[node.children[0]].clone(),
                NiceKind::Forget(_) => {
                    let len = self.ctx_positions[p].len();
                    let mut out = BTreeSet::new();
                    let mut ctx = vec![false; len];
                    for &s in &per_node[node.children[0]] {
                        for a in 0..1u64 << len {
                            for (i, b) in ctx.iter_mut().enumerate() {
                                *b = a >> i & 1 == 1;
                            }
                            out.insert(self.forget(m, p, s, &ctx));
                        }
                    }
                    out.into_iter().collect()
                }
                NiceKind::Join => {
                    let mut out = BTreeSet::new();
                    for &l in &per_node[node.children[0]] {
                        for &r in &per_node[node.children[1]] {
                            out.insert(self.join(m, l, r));
                        }
                    }
                    out.into_iter().collect()
                }
            };
            per_node.push(states);
        }
        let all: BTreeSet<u32> = per_node.iter().flatten().copied().collect();
        Reachability { per_node, all: all.into_iter().collect() }
    }

    /// One line per reachable state per node, in canonical text form.
    pub fn dump_states(&self, m: &mut Machine, reach: &Reachability) -> String {
        let root = self.space.root();
        let mut out = String::new();
        for (p, states) in reach.per_node.iter().enumerate() {
            let kind = match self.td.node(p).kind {
                NiceKind::Leaf => "leaf".to_string(),
                NiceKind::Introduce(v) => format!("introduce {v}"),
                NiceKind::Forget(v) => format!("forget {v}"),
                NiceKind::Join => "join".to_string(),
            };
            let _ = writeln!(out, "c node {p} {kind}: {} states", states.len());
            for &s in states {
                let _ = writeln!(out, "{p} {}", m.value(root, s));
            }
        }
        out
    }
}

/// Accepts iff `delta` is consistent and encodes a model of `phi`.
pub fn run_decision_procedure(
    phi: &Formula,
    g: &Graph,
    t: &NiceTreeDecomposition,
    c: &Coloring,
    delta: &BooleanAssignment,
) -> Result<bool, StateError> {
    let inst = Instance::with_coloring(phi, g, t.clone(), c.clone())?;
    let mut m = inst.machine();
    inst.accepts(&mut m, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::{encode_assignment, MsoAssignment, Value};
    use crate::decomp::{make_nice, min_fill_decomposition};
    use crate::graph::{clique, path};
    use crate::mso::parse_formula;

    fn instance(src: &str, g: &Graph) -> Instance {
        let td = make_nice(g, &min_fill_decomposition(g).unwrap()).unwrap();
        Instance::new(&parse_formula(src).unwrap(), g, td).unwrap()
    }

    #[test]
    fn equality_on_single_vertex() {
        let g = clique(1).unwrap();
        let inst = instance("free vertex x; free vertex y; (x = y)", &g);
        let mut m = inst.machine();
        assert!(inst.accepts_bits(&mut m, &[true, true]));
        assert!(!inst.accepts_bits(&mut m, &[true, false]));
        assert!(!inst.accepts_bits(&mut m, &[false, false]));
    }

    #[test]
    fn adjacency_on_an_edge() {
        let g = path(2).unwrap();
        let f = parse_formula("free vertex x; free edge p; adj(x, p)").unwrap();
        let inst = instance("free vertex x; free edge p; adj(x, p)", &g);
        let mut m = inst.machine();
        for x in 1..=2 {
            let alpha = MsoAssignment::new().with("x", Value::Vertex(x)).with("p", Value::Edge(1));
            let delta = encode_assignment(&alpha, &f, &g).unwrap();
            assert!(inst.accepts(&mut m, &delta).unwrap());
        }
    }

    #[test]
    fn reachable_includes_root_states() {
        let g = path(3).unwrap();
        let inst = instance("free vset X; exists vertex v. (v in X)", &g);
        let mut m = inst.machine();
        let r = inst.reachable(&mut m);
        assert_eq!(r.per_node[0].len(), 1);
        let root = inst.decomposition().root();
        // Root states: X empty, X full, X a proper nonempty subset.
        assert_eq!(r.per_node[root].len(), 3);
        assert!(r.size() >= 2);
        assert!(inst.dump_states(&mut m, &r).contains("INIT"));
    }
}
