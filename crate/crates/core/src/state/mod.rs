//! The dynamic program over a nice tree decomposition. Every core formula
//! gets a state space with forget and join transitions; composite spaces
//! combine the spaces of their subformulas.
//!
//! A [`StateSpace`] is a pure description that depends only on the formula
//! and the width. Transitions are evaluated lazily by a [`Machine`], which
//! interns the states of each space node as small integers and memoizes
//! every transition it computes.

mod machine;
mod run;

use std::fmt;

use thiserror::Error;

use crate::mso::{Expr, Formula, Sort, VarId};

pub use machine::{get_all_consistent_extensions, BoundVar, Machine, Signature};
pub use run::{run_decision_procedure, ForgetInfo, Instance, Reachability};

/// Interned state ids shared by the atomic spaces.
pub const INIT: u32 = 0;
pub const TRUE: u32 = 1;

/// Interned id of the adjacency state remembering color `i`.
pub fn color_state(i: u32) -> u32 {
    1 + i
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("formula is not in core form")]
    NotCore,
    #[error("a quantifier block or the free variables hold more than 64 object variables")]
    TooManyObjects,
    #[error("{0}")]
    Decomposition(#[from] crate::decomp::DecompError),
    #[error("{0}")]
    Assignment(#[from] crate::assignment::AssignmentError),
    #[error("coloring is not good for the decomposition")]
    BadColoring,
}

/// A fixed-length bit sequence; bit `i` belongs to the `i`-th object
/// variable of the owning space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    pub len: u8,
    pub bits: u64,
}

impl BitVector {
    pub fn zero(len: usize) -> BitVector {
        BitVector { len: len as u8, bits: 0 }
    }

    pub fn ones(len: usize) -> BitVector {
        BitVector { len: len as u8, bits: full_mask(len) }
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len as usize {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub(crate) fn full_mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// Inner state of the quantified formula together with the bound object
/// variables already given a value below the current node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StatePair {
    pub inner: State,
    pub assigned: BitVector,
}

/// A state as a value, for inspection and dumps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum State {
    Init,
    True,
    Color(u32),
    Pair(Box<State>, Box<State>),
    /// Sorted, duplicate-free.
    Set(Vec<StatePair>),
    /// `None` is the inconsistency marker.
    Consistency(Option<BitVector>),
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Init => f.write_str("INIT"),
            State::True => f.write_str("TRUE"),
            State::Color(i) => write!(f, "c{i}"),
            State::Pair(a, b) => write!(f, "({a}, {b})"),
            State::Set(pairs) => {
                f.write_str("{")?;
                for (i, p) in pairs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "({}, {})", p.inner, p.assigned)?;
                }
                f.write_str("}")
            }
            State::Consistency(None) => f.write_str("⊥"),
            State::Consistency(Some(b)) => write!(f, "[{b}]"),
        }
    }
}

/// One node of a state-space tree. Child references index the owning
/// [`StateSpace`]'s node list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SpaceNode {
    /// Equality of two object variables of `sort`.
    Eq { x: VarId, y: VarId, sort: Sort },
    /// Membership of an object variable in a set variable; `sort` is the
    /// object sort.
    In { x: VarId, set: VarId, sort: Sort },
    /// Vertex `x` is an endpoint of edge `y`.
    Adj { x: VarId, y: VarId },
    Not(usize),
    And(usize, usize),
    Exists { block: Vec<BoundVar>, body: usize },
    /// Tracks which free object variables already have a value.
    Consistency { objects: Vec<(VarId, Sort)> },
    /// Product of the formula's space and the consistency space.
    Extended { formula: usize, consistency: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    nodes: Vec<SpaceNode>,
    /// Free variables of each node's subformula, ascending.
    free: Vec<Vec<VarId>>,
    root: usize,
    width: usize,
    n_vars: usize,
}

impl StateSpace {
    pub fn nodes(&self) -> &[SpaceNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &SpaceNode {
        &self.nodes[i]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Size of the formula's variable table; valuations have this length.
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn free_vars(&self, i: usize) -> &[VarId] {
        &self.free[i]
    }

    pub fn is_extended(&self) -> bool {
        matches!(self.nodes[self.root], SpaceNode::Extended { .. })
    }
}

/// Space for a core formula at decomposition width `w`.
pub fn build_state_space(phi: &Formula, w: usize) -> Result<StateSpace, StateError> {
    if !phi.is_core() {
        return Err(StateError::NotCore);
    }
    let mut space = StateSpace {
        nodes: Vec::new(),
        free: Vec::new(),
        root: 0,
        width: w,
        n_vars: phi.vars().len(),
    };
    space.root = build(phi, phi.body(), &mut space)?;
    Ok(space)
}

fn push(space: &mut StateSpace, node: SpaceNode, free: Vec<VarId>) -> usize {
    space.nodes.push(node);
    space.free.push(free);
    space.nodes.len() - 1
}

fn build(phi: &Formula, e: &Expr, space: &mut StateSpace) -> Result<usize, StateError> {
    let free: Vec<VarId> = e.free_vars().into_iter().collect();
    let node = match e {
        Expr::Eq(x, y) => SpaceNode::Eq { x: *x, y: *y, sort: phi.var(*x).sort },
        Expr::In(x, set) => SpaceNode::In { x: *x, set: *set, sort: phi.var(*x).sort },
        Expr::Adj(x, y) => SpaceNode::Adj { x: *x, y: *y },
        Expr::Not(a) => SpaceNode::Not(build(phi, a, space)?),
        Expr::And(a, b) => {
            let l = build(phi, a, space)?;
            let r = build(phi, b, space)?;
            SpaceNode::And(l, r)
        }
        Expr::Exists(vs, body) => {
            let mut block = Vec::with_capacity(vs.len());
            let mut objects = 0u8;
            for &v in vs {
                let sort = phi.var(v).sort;
                let bit = sort.is_object().then(|| {
                    objects += 1;
                    objects - 1
                });
                if objects > 64 {
                    return Err(StateError::TooManyObjects);
                }
                block.push(BoundVar { var: v, sort, bit });
            }
            let body = build(phi, body, space)?;
            SpaceNode::Exists { block, body }
        }
        _ => return Err(StateError::NotCore),
    };
    Ok(push(space, node, free))
}

/// Product of `space` with the consistency space over the free object
/// variables of `phi`.
pub fn with_consistency(space: &StateSpace, phi: &Formula) -> Result<StateSpace, StateError> {
    let objects: Vec<(VarId, Sort)> = phi
        .free_variables()
        .into_iter()
        .filter(|v| v.sort.is_object())
        .map(|v| (v.id, v.sort))
        .collect();
    if objects.len() > 64 {
        return Err(StateError::TooManyObjects);
    }
    let mut out = space.clone();
    let mut sorted_free = phi.free_ids().to_vec();
    sorted_free.sort();
    let mut objects_free: Vec<VarId> = objects.iter().map(|o| o.0).collect();
    objects_free.sort();
    let consistency = push(&mut out, SpaceNode::Consistency { objects }, objects_free);
    let formula = space.root;
    out.root = push(&mut out, SpaceNode::Extended { formula, consistency }, sorted_free);
    Ok(out)
}
