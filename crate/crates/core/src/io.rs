//! JSON documents for compiled diagrams and Graphviz export.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{DecisionVariable, DummyKind, Legend};
use crate::decomp::{NiceKind, NiceTreeDecomposition};
use crate::mso::Sort;
use crate::obdd::{Obdd, ObddNode};
use crate::query::Diagram;
use crate::sdd::{Sdd, SddNode, VNode, VTree};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed diagram document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("inconsistent diagram document: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeEntry {
    pub name: String,
    pub sort: Sort,
}

/// One legend variable. `mso_variable` and `object` are absent for dummies,
/// `dummy` is present only for them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableEntry {
    pub index: usize,
    pub name: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mso_variable: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub object: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dummy: Option<(DummyKind, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegendDoc {
    pub free: Vec<FreeEntry>,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub variables: Vec<VariableEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VTreeDoc {
    pub root: usize,
    pub nodes: Vec<VNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiagramDoc {
    Sdd {
        legend: LegendDoc,
        vtree: VTreeDoc,
        nodes: Vec<SddNode>,
        root: u32,
        #[serde(default)]
        stats: BTreeMap<String, String>,
    },
    Obdd {
        legend: LegendDoc,
        order: Vec<usize>,
        nodes: Vec<ObddNode>,
        root: u32,
        #[serde(default)]
        stats: BTreeMap<String, String>,
    },
}

pub fn legend_doc(legend: &Legend) -> LegendDoc {
    let names = legend.free_names();
    let variables = legend
        .vars()
        .iter()
        .enumerate()
        .map(|(index, v)| {
            let kind = match v {
                DecisionVariable::VertexEq { .. } => "vertex_eq",
                DecisionVariable::EdgeEq { .. } => "edge_eq",
                DecisionVariable::VertexIn { .. } => "vertex_in",
                DecisionVariable::EdgeIn { .. } => "edge_in",
                DecisionVariable::Dummy { .. } => "dummy",
            };
            let dummy = match *v {
                DecisionVariable::Dummy { kind, node } => Some((kind, node)),
                _ => None,
            };
            VariableEntry {
                index,
                name: v.describe(&names),
                kind: kind.into(),
                mso_variable: v.slot().map(|s| names[s].clone()),
                object: v.object(),
                dummy,
            }
        })
        .collect();
    LegendDoc {
        free: legend
            .free()
            .iter()
            .map(|(name, sort)| FreeEntry { name: name.clone(), sort: *sort })
            .collect(),
        n_vertices: legend.n_vertices(),
        n_edges: legend.n_edges(),
        variables,
    }
}

pub fn legend_from_doc(doc: &LegendDoc) -> Result<Legend, IoError> {
    let free: Vec<(String, Sort)> = doc.free.iter().map(|f| (f.name.clone(), f.sort)).collect();
    let dummies = doc
        .variables
        .iter()
        .filter_map(|v| v.dummy.map(|(kind, node)| DecisionVariable::Dummy { kind, node }))
        .collect();
    let legend = Legend::from_parts(free, doc.n_vertices, doc.n_edges, dummies).map_err(IoError::Invalid)?;
    if legend_doc(&legend).variables != doc.variables {
        return Err(IoError::Invalid("variable list does not match the free variables".into()));
    }
    Ok(legend)
}

/// Reachable nodes renumbered children first, and the new root id.
fn compact_sdd(sdd: &Sdd) -> (Vec<SddNode>, u32) {
    let mut remap: HashMap<u32, u32> = HashMap::from([(0, 0), (1, 1)]);
    let mut nodes = vec![SddNode::False, SddNode::True];
    for x in sdd.reachable() {
        if remap.contains_key(&x) {
            continue;
        }
        let n = match sdd.manager.node(x) {
            SddNode::Decomposition { vnode, elements } => SddNode::Decomposition {
                vnode: *vnode,
                elements: elements.iter().map(|&(p, s)| (remap[&p], remap[&s])).collect(),
            },
            other => other.clone(),
        };
        nodes.push(n);
        remap.insert(x, nodes.len() as u32 - 1);
    }
    (nodes, remap[&sdd.root])
}

pub fn sdd_doc(sdd: &Sdd, stats: BTreeMap<String, String>) -> DiagramDoc {
    let (nodes, root) = compact_sdd(sdd);
    DiagramDoc::Sdd {
        legend: legend_doc(&sdd.legend),
        vtree: VTreeDoc { root: sdd.vtree.root(), nodes: sdd.vtree.nodes().to_vec() },
        nodes,
        root,
        stats,
    }
}

pub fn obdd_doc(obdd: &Obdd, stats: BTreeMap<String, String>) -> DiagramDoc {
    DiagramDoc::Obdd {
        legend: legend_doc(obdd.legend()),
        order: obdd.order().to_vec(),
        nodes: obdd.nodes().to_vec(),
        root: obdd.root(),
        stats,
    }
}

/// A diagram of either kind, as read back from a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyDiagram {
    Sdd(Sdd),
    Obdd(Obdd),
}

impl AnyDiagram {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyDiagram::Sdd(_) => "sdd",
            AnyDiagram::Obdd(_) => "obdd",
        }
    }

    pub fn size(&self) -> usize {
        match self {
            AnyDiagram::Sdd(d) => d.size(),
            AnyDiagram::Obdd(d) => d.size(),
        }
    }

    fn inner(&self) -> &dyn Diagram {
        match self {
            AnyDiagram::Sdd(d) => d,
            AnyDiagram::Obdd(d) => d,
        }
    }
}

impl Diagram for AnyDiagram {
    fn legend(&self) -> &Legend {
        self.inner().legend()
    }

    fn evaluate_bits(&self, bits: &[bool]) -> bool {
        self.inner().evaluate_bits(bits)
    }

    fn raw_model_count(&self) -> BigUint {
        self.inner().raw_model_count()
    }

    fn min_cost_model(&self, cost: &[bool], fixed: &[Option<bool>]) -> Option<Vec<bool>> {
        self.inner().min_cost_model(cost, fixed)
    }
}

pub fn diagram_from_doc(doc: &DiagramDoc) -> Result<AnyDiagram, IoError> {
    match doc {
        DiagramDoc::Sdd { legend, vtree, nodes, root, .. } => {
            let legend = legend_from_doc(legend)?;
            let vtree = VTree::new(vtree.nodes.clone(), vtree.root, legend.len()).map_err(IoError::Invalid)?;
            let sdd = Sdd::from_nodes(nodes.clone(), *root, vtree, legend).map_err(IoError::Invalid)?;
            Ok(AnyDiagram::Sdd(sdd))
        }
        DiagramDoc::Obdd { legend, order, nodes, root, .. } => {
            let legend = legend_from_doc(legend)?;
            let obdd = Obdd::from_nodes(nodes.clone(), *root, order.clone(), legend).map_err(IoError::Invalid)?;
            Ok(AnyDiagram::Obdd(obdd))
        }
    }
}

pub fn write_doc(doc: &DiagramDoc) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn read_doc(text: &str) -> Result<DiagramDoc, IoError> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_diagram(text: &str) -> Result<AnyDiagram, IoError> {
    diagram_from_doc(&read_doc(text)?)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('{', "\\{").replace('}', "\\}").replace('|', "\\|")
}

/// Decompositions as rows of paired prime and sub boxes. Terminals and
/// literals are written inside the boxes; other children get an edge.
pub fn sdd_to_dot(sdd: &Sdd) -> String {
    let mut out = String::from("digraph sdd {\n  node [shape=record];\n");
    let inline = |x: u32| match sdd.manager.node(x) {
        SddNode::False => Some("⊥".to_string()),
        SddNode::True => Some("⊤".to_string()),
        SddNode::Literal { var, positive } => {
            Some(format!("{}{}", if *positive { "" } else { "¬" }, sdd.legend.name(*var)))
        }
        SddNode::Decomposition { .. } => None,
    };
    if let Some(label) = inline(sdd.root) {
        let _ = writeln!(out, "  n{} [shape=box,label=\"{}\"];", sdd.root, escape(&label));
    }
    for x in sdd.reachable() {
        let SddNode::Decomposition { vnode, elements } = sdd.manager.node(x) else { continue };
        let _ = writeln!(out, "  v{x} [shape=circle,label=\"{vnode}\"];");
        let boxes: Vec<String> = elements
            .iter()
            .enumerate()
            .map(|(i, &(p, s))| {
                let p = inline(p).map_or(String::new(), |l| escape(&l));
                let s = inline(s).map_or(String::new(), |l| escape(&l));
                format!("{{<p{i}>{p}|<s{i}>{s}}}")
            })
            .collect();
        let _ = writeln!(out, "  n{x} [label=\"{}\"];", boxes.join("|"));
        let _ = writeln!(out, "  v{x} -> n{x};");
        for (i, &(p, s)) in elements.iter().enumerate() {
            for (port, child) in [("p", p), ("s", s)] {
                if inline(child).is_none() {
                    let _ = writeln!(out, "  n{x}:{port}{i} -> v{child};");
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Dotted edges for `0`, solid for `1`.
pub fn obdd_to_dot(obdd: &Obdd) -> String {
    let mut out = String::from("digraph obdd {\n");
    let legend = obdd.legend();
    let mut stack = vec![obdd.root()];
    let mut seen = vec![false; obdd.nodes().len()];
    while let Some(x) = stack.pop() {
        if std::mem::replace(&mut seen[x as usize], true) {
            continue;
        }
        match obdd.nodes()[x as usize] {
            ObddNode::Terminal(v) => {
                let _ = writeln!(out, "  n{x} [shape=box,label=\"{}\"];", u8::from(v));
            }
            ObddNode::Decision { var, lo, hi } => {
                let _ = writeln!(out, "  n{x} [shape=circle,label=\"{}\"];", escape(&legend.name(var)));
                let _ = writeln!(out, "  n{x} -> n{lo} [style=dotted];");
                let _ = writeln!(out, "  n{x} -> n{hi};");
                stack.push(lo);
                stack.push(hi);
            }
        }
    }
    out.push_str("}\n");
    out
}

pub fn diagram_to_dot(d: &AnyDiagram) -> String {
    match d {
        AnyDiagram::Sdd(s) => sdd_to_dot(s),
        AnyDiagram::Obdd(o) => obdd_to_dot(o),
    }
}

/// Nice decomposition as a tree of labeled bags.
pub fn decomposition_to_dot(t: &NiceTreeDecomposition) -> String {
    let mut out = String::from("digraph decomposition {\n  node [shape=box];\n");
    for (i, n) in t.nodes().iter().enumerate() {
        let kind = match n.kind {
            NiceKind::Leaf => "leaf".to_string(),
            NiceKind::Introduce(v) => format!("introduce {v}"),
            NiceKind::Forget(v) => format!("forget {v}"),
            NiceKind::Join => "join".to_string(),
        };
        let bag: Vec<String> = n.label.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "  t{i} [label=\"{i}: {kind}\\n{{{}}}\"];", bag.join(","));
        for &c in &n.children {
            let _ = writeln!(out, "  t{i} -> t{c};");
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{good_coloring, id_order_path_decomposition, make_nice};
    use crate::graph::path;
    use crate::obdd::compile_obdd;
    use crate::query::kappa_formula;
    use crate::sdd::compile_sdd;

    #[test]
    fn round_trips() {
        let g = path(3).unwrap();
        let t = make_nice(&g, &id_order_path_decomposition(&g).unwrap()).unwrap();
        let c = good_coloring(&g, &t).unwrap();
        let s = compile_sdd(&kappa_formula(), &g, &t, &c).unwrap().sdd;
        let back = read_diagram(&write_doc(&sdd_doc(&s, BTreeMap::new()))).unwrap();
        let AnyDiagram::Sdd(back) = back else { panic!() };
        assert_eq!(back.size(), s.size());
        assert_eq!(back.legend, s.legend);
        let o = compile_obdd(&kappa_formula(), &g, &t, &c).unwrap().obdd;
        let back = read_diagram(&write_doc(&obdd_doc(&o, BTreeMap::new()))).unwrap();
        assert_eq!(back, AnyDiagram::Obdd(o.clone()));
        assert!(obdd_to_dot(&o).contains("style=dotted"));
        assert!(sdd_to_dot(&s).starts_with("digraph sdd"));
        assert!(decomposition_to_dot(&t).contains("forget"));
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(read_diagram("{").is_err());
        assert!(read_diagram(r#"{"kind":"obdd","legend":{"free":[],"n_vertices":1,"n_edges":0,"variables":[]},"order":[],"nodes":[],"root":0}"#).is_err());
    }
}
