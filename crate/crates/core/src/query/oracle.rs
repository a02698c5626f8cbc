use std::collections::BTreeSet;

use super::QueryError;
use crate::assignment::{Legend, MsoAssignment, Value};
use crate::graph::Graph;
use crate::mso::{Expr, Formula, Sort, VarId};

/// Largest universe a set variable may range over in the oracle.
const SET_UNIVERSE_CAP: usize = 64;
/// Largest universe a quantified set variable is enumerated over.
const SET_QUANTIFIER_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Val {
    Obj(u32),
    /// Bit `i` is object `i + 1`.
    Set(u64),
}

struct Eval<'a> {
    phi: &'a Formula,
    g: &'a Graph,
    degree: Vec<usize>,
}

impl Eval<'_> {
    fn universe(&self, sort: Sort) -> usize {
        if sort.on_vertices() {
            self.g.n_vertices()
        } else {
            self.g.n_edges()
        }
    }

    fn obj(env: &[Option<Val>], v: VarId) -> u32 {
        match env[v.index()] {
            Some(Val::Obj(x)) => x,
            other => panic!("object variable bound to {other:?}"),
        }
    }

    fn set(env: &[Option<Val>], v: VarId) -> u64 {
        match env[v.index()] {
            Some(Val::Set(s)) => s,
            other => panic!("set variable bound to {other:?}"),
        }
    }

    fn eval(&self, e: &Expr, env: &mut Vec<Option<Val>>) -> bool {
        match e {
            Expr::Adj(x, y) => self.g.edge(Self::obj(env, *y)).contains(Self::obj(env, *x)),
            Expr::Eq(x, y) => Self::obj(env, *x) == Self::obj(env, *y),
            Expr::Neq(x, y) => Self::obj(env, *x) != Self::obj(env, *y),
            Expr::In(x, s) => Self::set(env, *s) >> (Self::obj(env, *x) - 1) & 1 == 1,
            Expr::NotIn(x, s) => Self::set(env, *s) >> (Self::obj(env, *x) - 1) & 1 == 0,
            Expr::EdgeRel(e, u, v) => {
                let (e, u, v) = (Self::obj(env, *e), Self::obj(env, *u), Self::obj(env, *v));
                let edge = self.g.edge(e);
                u != v && edge.contains(u) && edge.contains(v)
            }
            Expr::Nbr(u, v) => {
                let (u, v) = (Self::obj(env, *u), Self::obj(env, *v));
                if u == v {
                    self.degree[u as usize - 1] > 0
                } else {
                    self.g.adjacent(u, v)
                }
            }
            Expr::Not(a) => !self.eval(a, env),
            Expr::And(a, b) => self.eval(a, env) && self.eval(b, env),
            Expr::Or(a, b) => self.eval(a, env) || self.eval(b, env),
            Expr::Implies(a, b) => !self.eval(a, env) || self.eval(b, env),
            Expr::Exists(vs, a) => self.quantify(vs, a, env, true),
            Expr::Forall(vs, a) => !self.quantify(vs, a, env, false),
        }
    }

    /// Whether some assignment of `vs` makes the body equal `want`.
    fn quantify(&self, vs: &[VarId], body: &Expr, env: &mut Vec<Option<Val>>, want: bool) -> bool {
        let Some((&v, rest)) = vs.split_first() else {
            return self.eval(body, env) == want;
        };
        let sort = self.phi.var(v).sort;
        let n = self.universe(sort);
        let found = if sort.is_object() {
            (1..=n as u32).any(|x| {
                env[v.index()] = Some(Val::Obj(x));
                self.quantify(rest, body, env, want)
            })
        } else {
            (0..1u64 << n).any(|s| {
                env[v.index()] = Some(Val::Set(s));
                self.quantify(rest, body, env, want)
            })
        };
        env[v.index()] = None;
        found
    }
}

fn check_quantified_sets(phi: &Formula, e: &Expr, g: &Graph) -> Result<(), QueryError> {
    match e {
        Expr::Exists(vs, a) | Expr::Forall(vs, a) => {
            for &v in vs {
                let sort = phi.var(v).sort;
                let n = if sort.on_vertices() { g.n_vertices() } else { g.n_edges() };
                if !sort.is_object() && n > SET_QUANTIFIER_CAP {
                    return Err(QueryError::Cap(format!(
                        "quantified set variable over {n} objects exceeds {SET_QUANTIFIER_CAP}"
                    )));
                }
            }
            check_quantified_sets(phi, a, g)
        }
        Expr::Not(a) => check_quantified_sets(phi, a, g),
        Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) => {
            check_quantified_sets(phi, a, g)?;
            check_quantified_sets(phi, b, g)
        }
        _ => Ok(()),
    }
}

/// Direct recursive evaluation of `phi` on `g` under `alpha`; quantifiers
/// range over the whole universe of their sort.
pub fn oracle_eval(phi: &Formula, g: &Graph, alpha: &MsoAssignment) -> Result<bool, QueryError> {
    check_quantified_sets(phi, phi.body(), g)?;
    // Validates values against the graph.
    Legend::new(phi, g).encode_bits(alpha)?;
    let mut env: Vec<Option<Val>> = vec![None; phi.vars().len()];
    for v in phi.free_variables() {
        let value = alpha.get(&v.name).expect("checked by encode");
        env[v.id.index()] = Some(match value {
            Value::Vertex(x) | Value::Edge(x) => Val::Obj(*x),
            Value::VertexSet(s) | Value::EdgeSet(s) => {
                let n = if v.sort.on_vertices() { g.n_vertices() } else { g.n_edges() };
                if n > SET_UNIVERSE_CAP {
                    return Err(QueryError::Cap(format!("set universe of {n} objects")));
                }
                Val::Set(s.iter().fold(0u64, |m, &x| m | 1 << (x - 1)))
            }
        });
    }
    let mut degree = vec![0usize; g.n_vertices()];
    for (_, e) in g.edges() {
        degree[e.u as usize - 1] += 1;
        degree[e.v as usize - 1] += 1;
    }
    Ok(Eval { phi, g, degree }.eval(phi.body(), &mut env))
}

/// Models of `phi` on `g` as decision-variable bit vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSet {
    pub legend: Legend,
    pub models: BTreeSet<Vec<bool>>,
}

impl ModelSet {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn contains(&self, bits: &[bool]) -> bool {
        self.models.contains(bits)
    }
}

/// Every assignment to the free variables of `phi` over `g`.
pub fn all_assignments(phi: &Formula, g: &Graph) -> Vec<MsoAssignment> {
    let mut out = vec![MsoAssignment::new()];
    for v in phi.free_variables() {
        let n = if v.sort.on_vertices() { g.n_vertices() } else { g.n_edges() };
        let values: Vec<Value> = match v.sort {
            Sort::Vertex => (1..=n as u32).map(Value::Vertex).collect(),
            Sort::Edge => (1..=n as u32).map(Value::Edge).collect(),
            Sort::VertexSet | Sort::EdgeSet => (0..1u64 << n)
                .map(|m| {
                    let s: BTreeSet<u32> = (0..n as u32).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect();
                    if v.sort == Sort::VertexSet {
                        Value::VertexSet(s)
                    } else {
                        Value::EdgeSet(s)
                    }
                })
                .collect(),
        };
        let name = &v.name;
        out = out
            .into_iter()
            .flat_map(|a| values.iter().map(move |x| a.clone().with(name, x.clone())))
            .collect();
    }
    out
}

/// Enumerate all assignments, keep the models, encode each. Refuses when
/// there are more than `cap` decision variables.
pub fn oracle_models(phi: &Formula, g: &Graph, cap: usize) -> Result<ModelSet, QueryError> {
    let legend = Legend::new(phi, g);
    if legend.decision_count() > cap {
        return Err(QueryError::Cap(format!(
            "{} decision variables exceed the cap of {cap}",
            legend.decision_count()
        )));
    }
    let mut models = BTreeSet::new();
    for alpha in all_assignments(phi, g) {
        if oracle_eval(phi, g, &alpha)? {
            models.insert(legend.encode_bits(&alpha)?);
        }
    }
    Ok(ModelSet { legend, models })
}

/// Oracle value of the Boolean function on arbitrary decision-variable
/// bits: false when inconsistent, otherwise the formula's truth value.
pub fn oracle_function(phi: &Formula, g: &Graph, legend: &Legend, bits: &[bool]) -> Result<bool, QueryError> {
    match legend.decode_bits(bits) {
        Ok(alpha) => oracle_eval(phi, g, &alpha),
        Err(_) => Ok(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{clique, path};
    use crate::mso::parse_formula;
    use crate::query::kappa_formula;

    #[test]
    fn adjacency_and_equality() {
        let g = path(2).unwrap();
        let f = parse_formula("free vertex x; free edge p; adj(x, p)").unwrap();
        let a = MsoAssignment::new().with("x", Value::Vertex(1)).with("p", Value::Edge(1));
        assert!(oracle_eval(&f, &g, &a).unwrap());
        let f = parse_formula("free vertex x; free vertex y; (x = y)").unwrap();
        let a = MsoAssignment::new().with("x", Value::Vertex(1)).with("y", Value::Vertex(2));
        assert!(!oracle_eval(&f, &g, &a).unwrap());
    }

    #[test]
    fn vertex_cover_of_triangle() {
        let g = clique(3).unwrap();
        let a = MsoAssignment::new()
            .with("XV", Value::VertexSet([1, 2].into()))
            .with("XE", Value::EdgeSet(BTreeSet::new()));
        assert!(oracle_eval(&kappa_formula(), &g, &a).unwrap());
        let a = MsoAssignment::new()
            .with("XV", Value::VertexSet([1].into()))
            .with("XE", Value::EdgeSet(BTreeSet::new()));
        assert!(!oracle_eval(&kappa_formula(), &g, &a).unwrap());
    }

    #[test]
    fn model_sets() {
        let g = path(2).unwrap();
        let f = parse_formula("free vertex x; free vertex y; (x = y)").unwrap();
        assert_eq!(oracle_models(&f, &g, 20).unwrap().len(), 2);
        let f = parse_formula("free vertex x; ~(x = x)").unwrap();
        assert!(oracle_models(&f, &g, 20).unwrap().is_empty());
        let m = oracle_models(&kappa_formula(), &clique(3).unwrap(), 20).unwrap();
        // Per edge, 7 of the 8 local patterns cover it; count by hand over vertex subsets.
        let mut expected = 0;
        for vs in 0..8u32 {
            for es in 0..8u32 {
                let covered = [(0, 1, 0), (0, 2, 1), (1, 2, 2)]
                    .iter()
                    .all(|&(u, v, e)| vs >> u & 1 == 1 || vs >> v & 1 == 1 || es >> e & 1 == 1);
                expected += covered as usize;
            }
        }
        assert_eq!(m.len(), expected);
        assert!(oracle_models(&kappa_formula(), &clique(3).unwrap(), 5).is_err());
    }

    #[test]
    fn neighbour_of_itself() {
        let f = parse_formula("free vertex u; nbr(u, u)").unwrap();
        let g = crate::graph::Graph::new(3, &[(1, 2)]).unwrap();
        let at = |v| oracle_eval(&f, &g, &MsoAssignment::new().with("u", Value::Vertex(v))).unwrap();
        assert!(at(1));
        assert!(!at(3));
    }
}
