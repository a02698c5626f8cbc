//! Decision variables, Boolean assignments over them, and the encoding of
//! MSO₂ assignments as consistent Boolean assignments.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::mso::{Formula, Sort};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DummyKind {
    Leaf,
    Forget,
    Join,
    Root,
    /// Stand-in v-tree leaf for a forget node whose context is empty.
    EmptyContext,
}

/// `slot` is the position of the free MSO variable in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecisionVariable {
    VertexEq { slot: usize, vertex: u32 },
    EdgeEq { slot: usize, edge: u32 },
    VertexIn { vertex: u32, slot: usize },
    EdgeIn { edge: u32, slot: usize },
    /// Padding variable with no semantic role, tagged by decomposition node.
    Dummy { kind: DummyKind, node: usize },
}

impl DecisionVariable {
    pub fn is_dummy(&self) -> bool {
        matches!(self, DecisionVariable::Dummy { .. })
    }

    pub fn slot(&self) -> Option<usize> {
        match *self {
            DecisionVariable::VertexEq { slot, .. }
            | DecisionVariable::EdgeEq { slot, .. }
            | DecisionVariable::VertexIn { slot, .. }
            | DecisionVariable::EdgeIn { slot, .. } => Some(slot),
            DecisionVariable::Dummy { .. } => None,
        }
    }

    pub fn object(&self) -> Option<u32> {
        match *self {
            DecisionVariable::VertexEq { vertex, .. } | DecisionVariable::VertexIn { vertex, .. } => {
                Some(vertex)
            }
            DecisionVariable::EdgeEq { edge, .. } | DecisionVariable::EdgeIn { edge, .. } => Some(edge),
            DecisionVariable::Dummy { .. } => None,
        }
    }

    /// Decision variable for `slot` and `object`, given the variable's sort.
    pub fn for_sort(sort: Sort, slot: usize, object: u32) -> DecisionVariable {
        match sort {
            Sort::Vertex => DecisionVariable::VertexEq { slot, vertex: object },
            Sort::Edge => DecisionVariable::EdgeEq { slot, edge: object },
            Sort::VertexSet => DecisionVariable::VertexIn { vertex: object, slot },
            Sort::EdgeSet => DecisionVariable::EdgeIn { edge: object, slot },
        }
    }

    /// Human-readable name such as `[x=3]` or `[e2∈X]`, given the free
    /// variable names by slot.
    pub fn describe(&self, names: &[String]) -> String {
        let n = |slot: usize| names.get(slot).map_or("?", |s| s.as_str());
        match *self {
            DecisionVariable::VertexEq { slot, vertex } => format!("[{}={vertex}]", n(slot)),
            DecisionVariable::EdgeEq { slot, edge } => format!("[{}=e{edge}]", n(slot)),
            DecisionVariable::VertexIn { vertex, slot } => format!("[{vertex}∈{}]", n(slot)),
            DecisionVariable::EdgeIn { edge, slot } => format!("[e{edge}∈{}]", n(slot)),
            DecisionVariable::Dummy { kind, node } => {
                let k = match kind {
                    DummyKind::Leaf => "leaf",
                    DummyKind::Forget => "forget",
                    DummyKind::Join => "join",
                    DummyKind::Root => "root",
                    DummyKind::EmptyContext => "ctx",
                };
                format!("_{k}{node}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssignmentError {
    #[error("unknown free variable `{0}`")]
    UnknownVariable(String),
    #[error("free variable `{0}` has no value")]
    Missing(String),
    #[error("value for `{name}` does not fit sort {sort}")]
    SortMismatch { name: String, sort: &'static str },
    #[error("value {value} for `{name}` is outside the graph")]
    OutOfRange { name: String, value: u32 },
    #[error("assignment is inconsistent on `{0}`")]
    Inconsistent(String),
    #[error("no value for decision variable {0}")]
    MissingDecisionVariable(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Value of one free MSO variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Vertex(u32),
    Edge(u32),
    VertexSet(BTreeSet<u32>),
    EdgeSet(BTreeSet<u32>),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Vertex(_) => Sort::Vertex,
            Value::Edge(_) => Sort::Edge,
            Value::VertexSet(_) => Sort::VertexSet,
            Value::EdgeSet(_) => Sort::EdgeSet,
        }
    }
}

/// Values of the free variables, keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MsoAssignment(pub BTreeMap<String, Value>);

impl MsoAssignment {
    pub fn new() -> MsoAssignment {
        MsoAssignment::default()
    }

    pub fn with(mut self, name: &str, value: Value) -> MsoAssignment {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }
}

/// Text form: one `set <var> <id>` or `member <var> <id>` per line.
impl fmt::Display for MsoAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, value) in &self.0 {
            match value {
                Value::Vertex(x) | Value::Edge(x) => writeln!(f, "set {name} {x}")?,
                Value::VertexSet(s) | Value::EdgeSet(s) => {
                    if s.is_empty() {
                        writeln!(f, "c {name} is empty")?;
                    }
                    for x in s {
                        writeln!(f, "member {name} {x}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// A Boolean assignment over an explicit set of decision variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BooleanAssignment(pub BTreeMap<DecisionVariable, bool>);

impl BooleanAssignment {
    pub fn get(&self, v: &DecisionVariable) -> Option<bool> {
        self.0.get(v).copied()
    }

    pub fn set(&mut self, v: DecisionVariable, value: bool) {
        self.0.insert(v, value);
    }
}

/// The ordered variable universe of one compiled function: the decision
/// variables of `(φ, G)` in canonical order, followed by any dummies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Legend {
    free: Vec<(String, Sort)>,
    n_vertices: usize,
    n_edges: usize,
    vars: Vec<DecisionVariable>,
    n_decision: usize,
    index: HashMap<DecisionVariable, usize>,
}

impl Legend {
    pub fn new(phi: &Formula, g: &Graph) -> Legend {
        let free: Vec<(String, Sort)> = phi
            .free_variables()
            .into_iter()
            .map(|v| (v.name, v.sort))
            .collect();
        Legend::from_parts(free, g.n_vertices(), g.n_edges(), Vec::new())
            .expect("no dummies to clash")
    }

    /// Rebuild a legend from its description; `dummies` are appended after
    /// the decision variables.
    pub fn from_parts(
        free: Vec<(String, Sort)>,
        n_vertices: usize,
        n_edges: usize,
        dummies: Vec<DecisionVariable>,
    ) -> Result<Legend, String> {
        let mut vars = Vec::new();
        for (slot, (_, sort)) in free.iter().enumerate() {
            let count = if sort.on_vertices() { n_vertices } else { n_edges };
            for obj in 1..=count as u32 {
                vars.push(DecisionVariable::for_sort(*sort, slot, obj));
            }
        }
        let n_decision = vars.len();
        let mut legend = Legend {
            free,
            n_vertices,
            n_edges,
            index: vars.iter().enumerate().map(|(i, v)| (*v, i)).collect(),
            vars,
            n_decision,
        };
        for d in dummies {
            if !d.is_dummy() || legend.index.contains_key(&d) {
                return Err(format!("bad dummy variable {d:?}"));
            }
            legend.push_dummy(d);
        }
        Ok(legend)
    }

    pub fn push_dummy(&mut self, d: DecisionVariable) -> usize {
        debug_assert!(d.is_dummy());
        let i = self.vars.len();
        self.vars.push(d);
        self.index.insert(d, i);
        i
    }

    pub fn free(&self) -> &[(String, Sort)] {
        &self.free
    }

    pub fn free_names(&self) -> Vec<String> {
        self.free.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Number of non-dummy variables; they occupy indices `0..decision_count()`.
    pub fn decision_count(&self) -> usize {
        self.n_decision
    }

    pub fn dummy_count(&self) -> usize {
        self.vars.len() - self.n_decision
    }

    pub fn vars(&self) -> &[DecisionVariable] {
        &self.vars
    }

    pub fn decision_variables(&self) -> &[DecisionVariable] {
        &self.vars[..self.n_decision]
    }

    pub fn var(&self, i: usize) -> DecisionVariable {
        self.vars[i]
    }

    pub fn index_of(&self, v: &DecisionVariable) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn name(&self, i: usize) -> String {
        self.vars[i].describe(&self.free_names())
    }

    /// Indices of the decision variables belonging to the named free variable.
    pub fn indices_of_free(&self, name: &str) -> Option<Vec<usize>> {
        let slot = self.free.iter().position(|(n, _)| n == name)?;
        Some(
            (0..self.n_decision)
                .filter(|&i| self.vars[i].slot() == Some(slot))
                .collect(),
        )
    }

    /// Bits for every legend variable; dummies default to `false`.
    pub fn bits_of(&self, delta: &BooleanAssignment) -> Result<Vec<bool>, AssignmentError> {
        self.vars
            .iter()
            .map(|v| match delta.get(v) {
                Some(b) => Ok(b),
                None if v.is_dummy() => Ok(false),
                None => Err(AssignmentError::MissingDecisionVariable(v.describe(&self.free_names()))),
            })
            .collect()
    }

    /// Assignment over the decision variables only, from the leading bits.
    pub fn assignment_of(&self, bits: &[bool]) -> BooleanAssignment {
        BooleanAssignment(
            self.decision_variables()
                .iter()
                .zip(bits)
                .map(|(v, b)| (*v, *b))
                .collect(),
        )
    }

    pub fn is_consistent_bits(&self, bits: &[bool]) -> bool {
        self.first_inconsistency(bits).is_none()
    }

    fn first_inconsistency(&self, bits: &[bool]) -> Option<usize> {
        let mut hits = vec![0usize; self.free.len()];
        for i in 0..self.n_decision {
            if bits[i] {
                if let DecisionVariable::VertexEq { slot, .. } | DecisionVariable::EdgeEq { slot, .. } =
                    self.vars[i]
                {
                    hits[slot] += 1;
                }
            }
        }
        (0..self.free.len()).find(|&s| self.free[s].1.is_object() && hits[s] != 1)
    }

    pub fn decode_bits(&self, bits: &[bool]) -> Result<MsoAssignment, AssignmentError> {
        if let Some(slot) = self.first_inconsistency(bits) {
            return Err(AssignmentError::Inconsistent(self.free[slot].0.clone()));
        }
        let mut values: Vec<Value> = self
            .free
            .iter()
            .map(|(_, sort)| match sort {
                Sort::Vertex => Value::Vertex(0),
                Sort::Edge => Value::Edge(0),
                Sort::VertexSet => Value::VertexSet(BTreeSet::new()),
                Sort::EdgeSet => Value::EdgeSet(BTreeSet::new()),
            })
            .collect();
        for i in 0..self.n_decision {
            if !bits[i] {
                continue;
            }
            let var = self.vars[i];
            let (slot, obj) = (var.slot().unwrap(), var.object().unwrap());
            match &mut values[slot] {
                Value::Vertex(x) | Value::Edge(x) => *x = obj,
                Value::VertexSet(s) | Value::EdgeSet(s) => {
                    s.insert(obj);
                }
            }
        }
        Ok(MsoAssignment(
            self.free
                .iter()
                .map(|(n, _)| n.clone())
                .zip(values)
                .collect(),
        ))
    }

    /// Decision-variable bits (no dummies) encoding `alpha`.
    pub fn encode_bits(&self, alpha: &MsoAssignment) -> Result<Vec<bool>, AssignmentError> {
        for name in alpha.0.keys() {
            if !self.free.iter().any(|(n, _)| n == name) {
                return Err(AssignmentError::UnknownVariable(name.clone()));
            }
        }
        let mut bits = vec![false; self.n_decision];
        let mut offset = 0;
        for (name, sort) in &self.free {
            let count = if sort.on_vertices() { self.n_vertices } else { self.n_edges };
            let value = alpha.get(name).ok_or_else(|| AssignmentError::Missing(name.clone()))?;
            if value.sort() != *sort {
                return Err(AssignmentError::SortMismatch {
                    name: name.clone(),
                    sort: sort.keyword(),
                });
            }
            let objects: Vec<u32> = match value {
                Value::Vertex(x) | Value::Edge(x) => vec![*x],
                Value::VertexSet(s) | Value::EdgeSet(s) => s.iter().copied().collect(),
            };
            for x in objects {
                if x == 0 || x as usize > count {
                    return Err(AssignmentError::OutOfRange {
                        name: name.clone(),
                        value: x,
                    });
                }
                bits[offset + x as usize - 1] = true;
            }
            offset += count;
        }
        Ok(bits)
    }
}

/// `𝓓` for `(φ, G)` in canonical order: declaration order, then object id.
pub fn decision_variables(phi: &Formula, g: &Graph) -> Vec<DecisionVariable> {
    Legend::new(phi, g).decision_variables().to_vec()
}

pub fn is_consistent(delta: &BooleanAssignment, phi: &Formula, g: &Graph) -> bool {
    let legend = Legend::new(phi, g);
    match legend.bits_of(delta) {
        Ok(bits) => legend.is_consistent_bits(&bits),
        Err(_) => false,
    }
}

pub fn encode_assignment(
    alpha: &MsoAssignment,
    phi: &Formula,
    g: &Graph,
) -> Result<BooleanAssignment, AssignmentError> {
    let legend = Legend::new(phi, g);
    let bits = legend.encode_bits(alpha)?;
    Ok(legend.assignment_of(&bits))
}

pub fn decode_assignment(
    delta: &BooleanAssignment,
    phi: &Formula,
    g: &Graph,
) -> Result<MsoAssignment, AssignmentError> {
    let legend = Legend::new(phi, g);
    legend.decode_bits(&legend.bits_of(delta)?)
}

/// Number of consistent assignments: `|V|^kvo · |E|^keo · 2^(|V|kvs + |E|kes)`.
pub fn consistent_assignment_count(phi: &Formula, g: &Graph) -> BigUint {
    let mut count = BigUint::one();
    for v in phi.free_variables() {
        count *= match v.sort {
            Sort::Vertex => BigUint::from(g.n_vertices()),
            Sort::Edge => BigUint::from(g.n_edges()),
            Sort::VertexSet => BigUint::one() << g.n_vertices(),
            Sort::EdgeSet => BigUint::one() << g.n_edges(),
        };
    }
    count
}

/// Parse the `set`/`member` text format. Set variables that never appear
/// are empty; `c` lines are comments.
pub fn parse_assignment(text: &str, free: &[(String, Sort)]) -> Result<MsoAssignment, AssignmentError> {
    let mut out = MsoAssignment::new();
    for (name, sort) in free {
        match sort {
            Sort::VertexSet => {
                out.0.insert(name.clone(), Value::VertexSet(BTreeSet::new()));
            }
            Sort::EdgeSet => {
                out.0.insert(name.clone(), Value::EdgeSet(BTreeSet::new()));
            }
            _ => {}
        }
    }
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('c') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        let perr = |msg: String| AssignmentError::Parse { line, msg };
        if fields.len() != 3 {
            return Err(perr(format!("expected `set|member <var> <id>`, found `{t}`")));
        }
        let id: u32 = fields[2]
            .parse()
            .map_err(|_| perr(format!("`{}` is not an object id", fields[2])))?;
        let name = fields[1];
        let sort = free
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
            .ok_or_else(|| AssignmentError::UnknownVariable(name.to_string()))?;
        match (fields[0], sort) {
            ("set", Sort::Vertex) => {
                out.0.insert(name.to_string(), Value::Vertex(id));
            }
            ("set", Sort::Edge) => {
                out.0.insert(name.to_string(), Value::Edge(id));
            }
            ("member", Sort::VertexSet | Sort::EdgeSet) => {
                if let Some(Value::VertexSet(s) | Value::EdgeSet(s)) = out.0.get_mut(name) {
                    s.insert(id);
                }
            }
            (cmd, _) => {
                return Err(perr(format!("`{cmd}` does not apply to `{name}` of sort {}", sort.keyword())))
            }
        }
    }
    Ok(out)
}

/// Render bits as a compact `name=0/1` list of the true decision variables.
pub fn describe_bits(legend: &Legend, bits: &[bool]) -> String {
    let mut out = String::new();
    for i in 0..legend.decision_count() {
        if bits[i] {
            if !out.is_empty() {
                out.push(' ');
            }
            let _ = write!(out, "{}", legend.name(i));
        }
    }
    if out.is_empty() {
        out.push_str("(all false)");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{clique, path};
    use crate::mso::{desugar, parse_formula};

    fn eq_formula() -> Formula {
        parse_formula("free vertex x; free vertex y; (x = y)").unwrap()
    }

    fn vv(slot: usize, vertex: u32) -> DecisionVariable {
        DecisionVariable::VertexEq { slot, vertex }
    }

    #[test]
    fn decision_variable_universe() {
        let k1 = clique(1).unwrap();
        assert_eq!(decision_variables(&eq_formula(), &k1), vec![vv(0, 1), vv(1, 1)]);
        let kappa = desugar(&crate::query::kappa_formula());
        let k3 = clique(3).unwrap();
        let d = decision_variables(&kappa, &k3);
        assert_eq!(d.len(), 6);
        assert_eq!(d[0], DecisionVariable::VertexIn { vertex: 1, slot: 0 });
        assert_eq!(d[5], DecisionVariable::EdgeIn { edge: 3, slot: 1 });
    }

    #[test]
    fn consistency() {
        let (f, k1) = (eq_formula(), clique(1).unwrap());
        let mut delta = BooleanAssignment::default();
        delta.set(vv(0, 1), true);
        delta.set(vv(1, 1), true);
        assert!(is_consistent(&delta, &f, &k1));
        delta.set(vv(0, 1), false);
        assert!(!is_consistent(&delta, &f, &k1));

        let f = parse_formula("free edge p; (p = p)").unwrap();
        let p3 = path(3).unwrap();
        let mut delta = BooleanAssignment::default();
        delta.set(DecisionVariable::EdgeEq { slot: 0, edge: 1 }, true);
        delta.set(DecisionVariable::EdgeEq { slot: 0, edge: 2 }, true);
        assert!(!is_consistent(&delta, &f, &p3));
    }

    #[test]
    fn encode_decode() {
        let k1 = clique(1).unwrap();
        let f = parse_formula("free vertex x; (x = x)").unwrap();
        let alpha = MsoAssignment::new().with("x", Value::Vertex(1));
        let delta = encode_assignment(&alpha, &f, &k1).unwrap();
        assert_eq!(delta.get(&vv(0, 1)), Some(true));
        assert_eq!(decode_assignment(&delta, &f, &k1).unwrap(), alpha);

        let k3 = clique(3).unwrap();
        let kappa = crate::query::kappa_formula();
        let alpha = MsoAssignment::new()
            .with("XV", Value::VertexSet([1, 3].into()))
            .with("XE", Value::EdgeSet(BTreeSet::new()));
        let delta = encode_assignment(&alpha, &kappa, &k3).unwrap();
        let member = |v| delta.get(&DecisionVariable::VertexIn { vertex: v, slot: 0 });
        assert_eq!((member(1), member(2), member(3)), (Some(true), Some(false), Some(true)));
        assert_eq!(decode_assignment(&delta, &kappa, &k3).unwrap(), alpha);

        let bad = MsoAssignment::new().with("x", Value::Vertex(2));
        assert!(matches!(
            encode_assignment(&bad, &f, &k1),
            Err(AssignmentError::OutOfRange { .. })
        ));
        let mut inconsistent = BooleanAssignment::default();
        inconsistent.set(vv(0, 1), false);
        assert!(matches!(
            decode_assignment(&inconsistent, &f, &k1),
            Err(AssignmentError::Inconsistent(_))
        ));
    }

    #[test]
    fn text_format() {
        let free = vec![("x".to_string(), Sort::Vertex), ("S".to_string(), Sort::VertexSet)];
        let a = parse_assignment("set x 2\nmember S 1\nmember S 3\n", &free).unwrap();
        assert_eq!(
            a,
            MsoAssignment::new()
                .with("x", Value::Vertex(2))
                .with("S", Value::VertexSet([1, 3].into()))
        );
        assert_eq!(parse_assignment(&a.to_string(), &free).unwrap(), a);
        assert!(parse_assignment("member x 1\n", &free).is_err());
        assert!(parse_assignment("set y 1\n", &free).is_err());
    }
}
