//! The brute-force semantics used as a verification oracle, queries over
//! compiled diagrams, and the vertex-cover constructions.

mod bounds;
mod cnf;
mod oracle;

use num_bigint::BigUint;
use thiserror::Error;

use crate::assignment::{AssignmentError, Legend, MsoAssignment};
use crate::mso::{parse_formula, Formula};

pub use bounds::{level_width_bound, obdd_size_bound, sdd_size_bound};
pub use cnf::{cnf_of_graph, cnf_order_from_vertex_order, tree_grouped_vertex_order, Clause, Cnf};
pub use oracle::{all_assignments, oracle_eval, oracle_function, oracle_models, ModelSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("cap exceeded: {0}")]
    Cap(String),
    #[error("{0}")]
    Assignment(#[from] AssignmentError),
    #[error("the diagram has no models")]
    Unsatisfiable,
    #[error("unknown free variable `{0}`")]
    UnknownVariable(String),
}

const KAPPA: &str = "free vset XV; free eset XE; \
    forall edge e. forall vertex u. forall vertex v. \
    ((((u != v) & adj(u, e)) & adj(v, e)) -> (((u in XV) | (v in XV)) | (e in XE)))";

/// Every edge has an endpoint in `XV` or is itself in `XE`.
pub fn kappa_formula() -> Formula {
    parse_formula(KAPPA).expect("kappa parses")
}

/// A compiled Boolean function over the variables of its legend.
pub trait Diagram {
    fn legend(&self) -> &Legend;

    /// Value on `bits`, indexed like the legend, dummies included.
    fn evaluate_bits(&self, bits: &[bool]) -> bool;

    /// Satisfying assignments over every legend variable, dummies included.
    fn raw_model_count(&self) -> BigUint;

    /// A model minimizing the number of true variables among those with
    /// `cost[i]`, with `fixed` variables pinned. Unconstrained variables
    /// outside the chosen path are false.
    fn min_cost_model(&self, cost: &[bool], fixed: &[Option<bool>]) -> Option<Vec<bool>>;
}

/// Number of models over the decision variables only.
pub fn model_count<D: Diagram + ?Sized>(d: &D) -> BigUint {
    d.raw_model_count() >> d.legend().dummy_count()
}

pub fn is_satisfiable<D: Diagram + ?Sized>(d: &D) -> bool {
    let n = d.legend().len();
    d.min_cost_model(&vec![false; n], &vec![None; n]).is_some()
}

/// Up to `limit` models in lexicographic order of their decision bits
/// (false before true), each with its decoded MSO assignment.
pub fn enumerate_models<D: Diagram + ?Sized>(d: &D, limit: usize) -> Vec<(Vec<bool>, MsoAssignment)> {
    let legend = d.legend();
    let cost = vec![false; legend.len()];
    let mut fixed = vec![None; legend.len()];
    let mut out = Vec::new();
    if limit > 0 {
        enumerate_from(d, &cost, &mut fixed, 0, limit, &mut out);
    }
    out
}

fn enumerate_from<D: Diagram + ?Sized>(
    d: &D,
    cost: &[bool],
    fixed: &mut Vec<Option<bool>>,
    i: usize,
    limit: usize,
    out: &mut Vec<(Vec<bool>, MsoAssignment)>,
) {
    let legend = d.legend();
    if i == legend.decision_count() {
        let bits: Vec<bool> = fixed[..i].iter().map(|b| b.unwrap()).collect();
        let alpha = legend.decode_bits(&bits).expect("models are consistent");
        out.push((bits, alpha));
        return;
    }
    for value in [false, true] {
        if out.len() >= limit {
            return;
        }
        fixed[i] = Some(value);
        if d.min_cost_model(cost, fixed).is_some() {
            enumerate_from(d, cost, fixed, i + 1, limit, out);
        }
    }
    fixed[i] = None;
}

/// Result of a minimum-cardinality query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinCardModel {
    pub cardinality: usize,
    pub bits: Vec<bool>,
    pub assignment: MsoAssignment,
}

/// A model with the fewest true `targets` among models with every `zero`
/// variable false.
pub fn min_cardinality_model<D: Diagram + ?Sized>(
    d: &D,
    targets: &[usize],
    zero: &[usize],
) -> Result<MinCardModel, QueryError> {
    let legend = d.legend();
    let mut cost = vec![false; legend.len()];
    for &t in targets {
        cost[t] = true;
    }
    let mut fixed = vec![None; legend.len()];
    for &z in zero {
        fixed[z] = Some(false);
    }
    let full = d.min_cost_model(&cost, &fixed).ok_or(QueryError::Unsatisfiable)?;
    let bits = full[..legend.decision_count()].to_vec();
    let cardinality = targets.iter().filter(|&&t| full[t]).count();
    let assignment = legend.decode_bits(&bits)?;
    Ok(MinCardModel { cardinality, bits, assignment })
}

/// Decision-variable indices of the named free variables.
pub fn variables_of(legend: &Legend, names: &[String]) -> Result<Vec<usize>, QueryError> {
    let mut out = Vec::new();
    for name in names {
        out.extend(
            legend
                .indices_of_free(name)
                .ok_or_else(|| QueryError::UnknownVariable(name.clone()))?,
        );
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mso::Sort;

    #[test]
    fn kappa_signature() {
        let k = kappa_formula();
        let free: Vec<(String, Sort)> = k.free_variables().into_iter().map(|v| (v.name, v.sort)).collect();
        assert_eq!(free, vec![("XV".into(), Sort::VertexSet), ("XE".into(), Sort::EdgeSet)]);
    }
}
