//! MSO₂ formulas over graphs: syntax trees, the `.mso` parser, and the
//! rewrite to the core connectives {adj, =, in, not, and, exists}.

mod desugar;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use desugar::desugar;
pub use parser::parse_formula;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Vertex,
    Edge,
    #[serde(rename = "vset")]
    VertexSet,
    #[serde(rename = "eset")]
    EdgeSet,
}

impl Sort {
    pub fn is_object(self) -> bool {
        matches!(self, Sort::Vertex | Sort::Edge)
    }

    /// Whether values of this sort range over (sets of) vertices.
    pub fn on_vertices(self) -> bool {
        matches!(self, Sort::Vertex | Sort::VertexSet)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Sort::Vertex => "vertex",
            Sort::Edge => "edge",
            Sort::VertexSet => "vset",
            Sort::EdgeSet => "eset",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Sort> {
        Some(match s {
            "vertex" => Sort::Vertex,
            "edge" => Sort::Edge,
            "vset" => Sort::VertexSet,
            "eset" => Sort::EdgeSet,
            _ => return None,
        })
    }
}

/// Index into a formula's variable table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MsoVariable {
    pub name: String,
    pub sort: Sort,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Vertex object incident to edge object.
    Adj(VarId, VarId),
    Eq(VarId, VarId),
    /// Object is a member of a set variable of the matching sort.
    In(VarId, VarId),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Exists(Vec<VarId>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Forall(Vec<VarId>, Box<Expr>),
    Neq(VarId, VarId),
    NotIn(VarId, VarId),
    /// `edge(e, u, v)`: `e` joins the distinct vertices `u` and `v`.
    EdgeRel(VarId, VarId, VarId),
    /// `nbr(u, v)`: some edge is incident to both `u` and `v`.
    Nbr(VarId, VarId),
}

impl Expr {
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn is_core(&self) -> bool {
        match self {
            Expr::Adj(..) | Expr::Eq(..) | Expr::In(..) => true,
            Expr::Not(a) => a.is_core(),
            Expr::And(a, b) => a.is_core() && b.is_core(),
            Expr::Exists(_, a) => a.is_core(),
            _ => false,
        }
    }

    /// Size: atoms count 3, every connective 1, every quantified variable 1.
    pub fn size(&self) -> usize {
        match self {
            Expr::Adj(..)
            | Expr::Eq(..)
            | Expr::In(..)
            | Expr::Neq(..)
            | Expr::NotIn(..)
            | Expr::EdgeRel(..)
            | Expr::Nbr(..) => 3,
            Expr::Not(a) => 1 + a.size(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) => 1 + a.size() + b.size(),
            Expr::Exists(vs, a) | Expr::Forall(vs, a) => vs.len() + a.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Expr::Adj(a, b) | Expr::Eq(a, b) | Expr::In(a, b) | Expr::Neq(a, b) => {
                out.insert(*a);
                out.insert(*b);
            }
            Expr::NotIn(a, b) | Expr::Nbr(a, b) => {
                out.insert(*a);
                out.insert(*b);
            }
            Expr::EdgeRel(a, b, c) => {
                out.extend([*a, *b, *c]);
            }
            Expr::Not(a) => a.collect_free(out),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Expr::Exists(vs, a) | Expr::Forall(vs, a) => {
                let mut inner = BTreeSet::new();
                a.collect_free(&mut inner);
                for v in vs {
                    inner.remove(v);
                }
                out.extend(inner);
            }
        }
    }
}

/// A free variable with its canonical indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeVariable {
    pub id: VarId,
    /// Position in declaration order.
    pub slot: usize,
    pub name: String,
    pub sort: Sort,
    /// Position among the free object variables, for object sorts.
    pub object_index: Option<usize>,
}

/// A formula together with its variable table and free-variable declarations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    vars: Vec<MsoVariable>,
    free: Vec<VarId>,
    body: Expr,
}

impl Formula {
    pub(crate) fn from_parts(vars: Vec<MsoVariable>, free: Vec<VarId>, body: Expr) -> Formula {
        Formula { vars, free, body }
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn var(&self, id: VarId) -> &MsoVariable {
        &self.vars[id.index()]
    }

    pub fn vars(&self) -> &[MsoVariable] {
        &self.vars
    }

    pub fn free_ids(&self) -> &[VarId] {
        &self.free
    }

    pub fn free_variables(&self) -> Vec<FreeVariable> {
        let mut objects = 0;
        self.free
            .iter()
            .enumerate()
            .map(|(slot, &id)| {
                let v = self.var(id);
                let object_index = v.sort.is_object().then(|| {
                    objects += 1;
                    objects - 1
                });
                FreeVariable {
                    id,
                    slot,
                    name: v.name.clone(),
                    sort: v.sort,
                    object_index,
                }
            })
            .collect()
    }

    pub fn free_by_name(&self, name: &str) -> Option<VarId> {
        self.free.iter().copied().find(|&id| self.var(id).name == name)
    }

    pub fn is_core(&self) -> bool {
        self.body.is_core()
    }

    pub fn is_closed(&self) -> bool {
        self.free.is_empty()
    }
}

pub fn formula_size(f: &Formula) -> usize {
    f.body.size()
}

pub fn free_variables(f: &Formula) -> Vec<FreeVariable> {
    f.free_variables()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MsoError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: sort error: {msg}")]
    Sort { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unbound variable `{name}`")]
    Unbound { line: usize, col: usize, name: String },
    #[error("{line}:{col}: `{name}` is declared free and cannot be rebound")]
    RebindFree { line: usize, col: usize, name: String },
    #[error("{line}:{col}: free variable `{name}` declared twice")]
    DuplicateFree { line: usize, col: usize, name: String },
    #[error("{line}:{col}: quantified variable `{name}` does not occur in its scope")]
    UnusedBinder { line: usize, col: usize, name: String },
}

struct Show<'a> {
    f: &'a Formula,
    e: &'a Expr,
}

impl<'a> fmt::Display for Show<'a> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = |id: &VarId| self.f.var(*id).name.as_str();
        let sub = |e: &'a Expr| Show { f: self.f, e };
        match self.e {
            Expr::Adj(a, b) => write!(out, "adj({}, {})", n(a), n(b)),
            Expr::Eq(a, b) => write!(out, "({} = {})", n(a), n(b)),
            Expr::In(a, b) => write!(out, "({} in {})", n(a), n(b)),
            Expr::Neq(a, b) => write!(out, "({} != {})", n(a), n(b)),
            Expr::NotIn(a, b) => write!(out, "({} notin {})", n(a), n(b)),
            Expr::EdgeRel(e, u, v) => write!(out, "edge({}, {}, {})", n(e), n(u), n(v)),
            Expr::Nbr(u, v) => write!(out, "nbr({}, {})", n(u), n(v)),
            Expr::Not(a) => write!(out, "~{}", sub(a)),
            Expr::And(a, b) => write!(out, "({} & {})", sub(a), sub(b)),
            Expr::Or(a, b) => write!(out, "({} | {})", sub(a), sub(b)),
            Expr::Implies(a, b) => write!(out, "({} -> {})", sub(a), sub(b)),
            Expr::Exists(vs, a) | Expr::Forall(vs, a) => {
                let q = if matches!(self.e, Expr::Exists(..)) { "exists" } else { "forall" };
                for v in vs {
                    write!(out, "{q} {} {}. ", self.f.var(*v).sort.keyword(), n(v))?;
                }
                write!(out, "{}", sub(a))
            }
        }
    }
}

/// Prints in the concrete syntax accepted by [`parse_formula`]. Merged
/// quantifier blocks print as nested single quantifiers.
impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &id in &self.free {
            let v = self.var(id);
            write!(out, "free {} {}; ", v.sort.keyword(), v.name)?;
        }
        write!(out, "{}", Show { f: self, e: &self.body })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(formula_size(&parse_formula("free vertex x; free edge y; adj(x, y)").unwrap()), 3);
        let f = desugar(&parse_formula("free vertex x; free vertex y; (x != y)").unwrap());
        assert_eq!(f.body(), &Expr::not(Expr::Eq(VarId(0), VarId(1))));
        assert_eq!(formula_size(&f), 4);
        let f = desugar(&parse_formula("exists vertex x. exists vset X. (x in X)").unwrap());
        assert!(matches!(f.body(), Expr::Exists(vs, _) if vs.len() == 2));
        assert_eq!(formula_size(&f), 5);
    }

    #[test]
    fn free_variable_order() {
        let f = parse_formula("free vertex x; free eset P; free edge y; ((x = x) & (y in P))").unwrap();
        let fv = f.free_variables();
        let names: Vec<_> = fv.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["x", "P", "y"]);
        assert_eq!(fv[0].object_index, Some(0));
        assert_eq!(fv[1].object_index, None);
        assert_eq!(fv[2].object_index, Some(1));
        assert!(parse_formula("exists vset X. exists vertex v. (v in X)")
            .unwrap()
            .free_variables()
            .is_empty());
    }

    #[test]
    fn display_round_trips() {
        let src = "free vset S; forall vertex u. exists vertex v. (((u = v) | nbr(u, v)) & (v in S))";
        let f = parse_formula(src).unwrap();
        assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        let d = desugar(&f);
        assert_eq!(desugar(&parse_formula(&d.to_string()).unwrap()), d);
    }
}
