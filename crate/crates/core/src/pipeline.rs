//! End-to-end compilation from a formula, a graph and an optional tree
//! decomposition, with the reported statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use thiserror::Error;

use crate::decomp::{
    good_coloring, id_order_path_decomposition, is_path_decomposition, make_nice, min_fill_decomposition,
    DecompError, TreeDecomposition,
};
use crate::graph::{clique_tree, Graph, GraphError};
use crate::io::AnyDiagram;
use crate::mso::Formula;
use crate::obdd::{compile_obdd_instance, obdd_apply, BoolOp, Obdd, ObddError};
use crate::query::{
    cnf_of_graph, cnf_order_from_vertex_order, kappa_formula, oracle_function, tree_grouped_vertex_order, Diagram,
    QueryError,
};
use crate::sdd::compile_sdd_instance;
use crate::state::{Instance, StateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Sdd,
    Obdd,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Decomposition(#[from] DecompError),
    #[error("{0}")]
    State(#[from] StateError),
    #[error("path decomposition required for the obdd target")]
    PathRequired,
    #[error("{0}")]
    Obdd(#[from] ObddError),
    #[error("{0}")]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Query(#[from] QueryError),
}

/// Where the decomposition came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionSource {
    Given,
    MinFill,
    IdOrderPath,
}

impl DecompositionSource {
    fn describe(self) -> &'static str {
        match self {
            DecompositionSource::Given => "given",
            DecompositionSource::MinFill => "min-fill",
            DecompositionSource::IdOrderPath => "id-order path",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stats {
    pub target: Target,
    pub source: DecompositionSource,
    pub n: usize,
    pub width: usize,
    pub formula_size: usize,
    pub k: usize,
    pub nice_nodes: usize,
    pub decision_variables: usize,
    pub dummy_variables: usize,
    pub reachable_states: usize,
    pub size: usize,
    pub bound: BigUint,
    pub max_level_width: Option<usize>,
    pub level_bound: Option<BigUint>,
}

impl Stats {
    pub fn within_bound(&self) -> bool {
        BigUint::from(self.size) <= self.bound
    }

    pub fn within_level_bound(&self) -> Option<bool> {
        Some(BigUint::from(self.max_level_width?) <= *self.level_bound.as_ref()?)
    }

    /// Machine-readable `key: value` pairs.
    pub fn pairs(&self) -> BTreeMap<String, String> {
        let yes_no = |b: bool| if b { "yes" } else { "no" }.to_string();
        let mut m = BTreeMap::new();
        m.insert("target".into(), match self.target { Target::Sdd => "sdd", Target::Obdd => "obdd" }.into());
        m.insert("decomposition".into(), self.source.describe().into());
        m.insert("n".into(), self.n.to_string());
        m.insert("width".into(), self.width.to_string());
        m.insert("formula_size".into(), self.formula_size.to_string());
        m.insert("k".into(), self.k.to_string());
        m.insert("nice_nodes".into(), self.nice_nodes.to_string());
        m.insert("decision_variables".into(), self.decision_variables.to_string());
        m.insert("dummy_variables".into(), self.dummy_variables.to_string());
        m.insert("reachable_states".into(), self.reachable_states.to_string());
        m.insert("size".into(), self.size.to_string());
        m.insert("bound".into(), self.bound.to_string());
        m.insert("bound_satisfied".into(), yes_no(self.within_bound()));
        if let (Some(w), Some(b), Some(ok)) = (self.max_level_width, &self.level_bound, self.within_level_bound()) {
            m.insert("max_level_width".into(), w.to_string());
            m.insert("level_width_bound".into(), b.to_string());
            m.insert("level_width_bound_satisfied".into(), yes_no(ok));
        }
        m
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let target = match self.target {
            Target::Sdd => "SDD",
            Target::Obdd => "OBDD",
        };
        let _ = writeln!(out, "{target} of size {} over {} decision variables", self.size, self.decision_variables);
        let _ = writeln!(
            out,
            "decomposition: {} of width {} ({} nice nodes)",
            self.source.describe(),
            self.width,
            self.nice_nodes
        );
        let _ = writeln!(out, "n = {}, |phi| = {}, k = {}", self.n, self.formula_size, self.k);
        let _ = writeln!(out, "reachable states: {}", self.reachable_states);
        let digits = self.bound.to_string().len();
        let _ = writeln!(
            out,
            "size bound: {} ({digits} digits), satisfied: {}",
            short(&self.bound),
            if self.within_bound() { "yes" } else { "NO" }
        );
        if let (Some(w), Some(b), Some(ok)) = (self.max_level_width, &self.level_bound, self.within_level_bound()) {
            let _ = writeln!(out, "max level width: {w} (bound {}), satisfied: {}", short(b), if ok { "yes" } else { "NO" });
        }
        out.push_str("--- stats ---\n");
        for (k, v) in self.pairs() {
            let _ = writeln!(out, "{k}: {v}");
        }
        out
    }
}

fn short(x: &BigUint) -> String {
    let s = x.to_string();
    if s.len() <= 24 {
        s
    } else {
        format!("{}...e{}", &s[..12], s.len() - 1)
    }
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub diagram: AnyDiagram,
    pub stats: Stats,
    pub instance: Instance,
}

/// Nice decomposition for `g`: the given one, else an id-order path for
/// the OBDD target and min-fill for the SDD target.
pub fn prepare(
    phi: &Formula,
    g: &Graph,
    td: Option<&TreeDecomposition>,
    target: Target,
) -> Result<(Instance, DecompositionSource), PipelineError> {
    let (raw, source) = match (td, target) {
        (Some(t), _) => (t.clone(), DecompositionSource::Given),
        (None, Target::Obdd) => (id_order_path_decomposition(g)?, DecompositionSource::IdOrderPath),
        (None, Target::Sdd) => (min_fill_decomposition(g)?, DecompositionSource::MinFill),
    };
    let nice = make_nice(g, &raw)?;
    if target == Target::Obdd && !is_path_decomposition(&nice) {
        return Err(PipelineError::PathRequired);
    }
    let c = good_coloring(g, &nice)?;
    Ok((Instance::with_coloring(phi, g, nice, c)?, source))
}

pub fn compile(
    phi: &Formula,
    g: &Graph,
    td: Option<&TreeDecomposition>,
    target: Target,
) -> Result<Compiled, PipelineError> {
    let (inst, source) = prepare(phi, g, td, target)?;
    let mut m = inst.machine();
    let reach = inst.reachable(&mut m);
    let (diagram, bound, level) = match target {
        Target::Sdd => {
            let c = compile_sdd_instance(&inst, &mut m, &reach);
            let bound = c.bound();
            (AnyDiagram::Sdd(c.sdd), bound, None)
        }
        Target::Obdd => {
            let c = compile_obdd_instance(&inst, &mut m, &reach)?;
            let (bound, lb) = (c.bound(), c.level_bound());
            let w = c.obdd.max_level_width();
            (AnyDiagram::Obdd(c.obdd), bound, Some((w, lb)))
        }
    };
    let legend = diagram.legend();
    let stats = Stats {
        target,
        source,
        n: inst.n(),
        width: inst.width(),
        formula_size: inst.formula_size(),
        k: inst.k(),
        nice_nodes: inst.decomposition().len(),
        decision_variables: legend.decision_count(),
        dummy_variables: legend.dummy_count(),
        reachable_states: reach.size(),
        size: diagram.size(),
        bound,
        max_level_width: level.as_ref().map(|l| l.0),
        level_bound: level.map(|l| l.1),
    };
    Ok(Compiled { diagram, stats, instance: inst })
}

/// Exhaustive comparison with the oracle over the decision variables,
/// dummies false. Returns the first disagreeing assignment.
pub fn first_mismatch<D: Diagram + ?Sized>(
    phi: &Formula,
    g: &Graph,
    d: &D,
    cap: usize,
) -> Result<Option<Vec<bool>>, QueryError> {
    let legend = d.legend();
    let n = legend.decision_count();
    if n > cap || n >= 64 {
        return Err(QueryError::Cap(format!("{n} decision variables exceed the cap of {cap}")));
    }
    let mut bits = vec![false; legend.len()];
    for a in 0..1u64 << n {
        for (i, b) in bits.iter_mut().enumerate().take(n) {
            *b = a >> i & 1 == 1;
        }
        if d.evaluate_bits(&bits) != oracle_function(phi, g, legend, &bits[..n])? {
            return Ok(Some(bits[..n].to_vec()));
        }
    }
    Ok(None)
}

/// Reduced OBDD of the cover constraints of `g` under `order`, built by
/// conjoining clause diagrams.
pub fn cnf_obdd(g: &Graph, order: Vec<usize>) -> Result<Obdd, PipelineError> {
    let cnf = cnf_of_graph(g);
    let legend = crate::assignment::Legend::new(&kappa_formula(), g);
    let mut acc = Obdd::constant(true, order.clone(), legend.clone());
    for c in &cnf.clauses {
        let clause = Obdd::clause(c, order.clone(), legend.clone());
        acc = obdd_apply(&acc, &clause, BoolOp::And)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub r: u32,
    pub vertices: usize,
    pub variables: usize,
    pub size: usize,
    /// `rk / 2`: the lower bound is `2^exponent`.
    pub exponent_halves: usize,
    /// `None` when `rk < 2` and no bound is asserted.
    pub bound_holds: Option<bool>,
    pub min_fill_width: usize,
    pub width_bound: usize,
}

impl BenchRow {
    pub fn bound_value(&self) -> f64 {
        2f64.powf(self.exponent_halves as f64 / 2.0)
    }
}

/// Largest vertex count bench rows may reach.
pub const BENCH_VERTEX_CAP: usize = 64;

pub fn bench_kt(k: usize, r_max: u32) -> Result<Vec<BenchRow>, PipelineError> {
    if k == 0 || r_max == 0 || r_max > 24 || k * ((1usize << r_max) - 1) > BENCH_VERTEX_CAP {
        return Err(QueryError::Cap(format!(
            "k = {k}, r = {r_max} needs more than {BENCH_VERTEX_CAP} vertices or is degenerate"
        ))
        .into());
    }
    let mut rows = Vec::new();
    for r in 1..=r_max {
        let g = clique_tree(k, r)?;
        let order = cnf_order_from_vertex_order(&g, &tree_grouped_vertex_order(k, r));
        let d = cnf_obdd(&g, order)?;
        let size = d.size();
        let e = r as usize * k;
        let bound_holds = (e >= 2).then(|| BigUint::from(size).pow(2) >= BigUint::from(1u32) << e);
        rows.push(BenchRow {
            r,
            vertices: g.n_vertices(),
            variables: g.size(),
            size,
            exponent_halves: e,
            bound_holds,
            min_fill_width: min_fill_decomposition(&g)?.width(),
            width_bound: 2 * k - 1,
        });
    }
    Ok(rows)
}

pub fn bench_table(k: usize, rows: &[BenchRow]) -> String {
    let mut out = format!("k = {k}\n r  vertices  vars      size   2^(rk/2)  bound     width (<= 2k-1)\n");
    for row in rows {
        let holds = match row.bound_holds {
            Some(true) => "holds",
            Some(false) => "FAILS",
            None => "degenerate, bound not asserted",
        };
        let _ = writeln!(
            out,
            "{:>2}  {:>8}  {:>4}  {:>8}  {:>9.2}  {holds:<8}  {} ({})",
            row.r,
            row.vertices,
            row.variables,
            row.size,
            row.bound_value(),
            row.min_fill_width,
            if row.min_fill_width <= row.width_bound { "ok" } else { "exceeds" },
        );
    }
    out
}
