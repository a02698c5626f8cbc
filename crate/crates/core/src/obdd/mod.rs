//! Ordered binary decision diagrams: reduction, apply, and compilation
//! along a nice path decomposition through a multi-terminal diagram whose
//! leaves carry machine states.

mod compile;

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::Legend;
use crate::query::Diagram;

pub use compile::{compile_obdd, compile_obdd_instance, path_order, ObddCompilation};

pub const FALSE: u32 = 0;
pub const TRUE: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObddError {
    #[error("path decomposition required: node {0} is a join")]
    NotAPath(usize),
    #[error("diagrams use different variable orders")]
    OrderMismatch,
    #[error("{0}")]
    State(#[from] crate::state::StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObddNode {
    Terminal(bool),
    /// `var` indexes the legend.
    Decision { var: usize, lo: u32, hi: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    And,
    Or,
    Xor,
    Implies,
}

impl BoolOp {
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            BoolOp::And => a && b,
            BoolOp::Or => a || b,
            BoolOp::Xor => a != b,
            BoolOp::Implies => !a || b,
        }
    }
}

/// Reduced-node store over a fixed order: redundant tests are skipped and
/// equal nodes shared.
#[derive(Debug, Clone)]
pub struct ObddBuilder {
    nodes: Vec<ObddNode>,
    unique: HashMap<(usize, u32, u32), u32>,
}

impl Default for ObddBuilder {
    fn default() -> Self {
        ObddBuilder::new()
    }
}

impl ObddBuilder {
    pub fn new() -> ObddBuilder {
        ObddBuilder {
            nodes: vec![ObddNode::Terminal(false), ObddNode::Terminal(true)],
            unique: HashMap::new(),
        }
    }

    pub fn mk(&mut self, var: usize, lo: u32, hi: u32) -> u32 {
        if lo == hi {
            return lo;
        }
        *self.unique.entry((var, lo, hi)).or_insert_with(|| {
            self.nodes.push(ObddNode::Decision { var, lo, hi });
            self.nodes.len() as u32 - 1
        })
    }

    pub fn finish(self, root: u32, order: Vec<usize>, legend: Legend) -> Obdd {
        Obdd::compact(&self.nodes, root, order, legend)
    }
}

/// Ids 0 and 1 are the terminals; children precede parents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obdd {
    nodes: Vec<ObddNode>,
    root: u32,
    /// Legend indices from first to last tested.
    order: Vec<usize>,
    level: Vec<usize>,
    legend: Legend,
}

const INF: usize = usize::MAX / 4;

impl Obdd {
    /// Checks ids, ranges and that `order` is a permutation of the legend;
    /// does not reduce.
    pub fn from_nodes(nodes: Vec<ObddNode>, root: u32, order: Vec<usize>, legend: Legend) -> Result<Obdd, String> {
        if nodes.len() < 2 || nodes[0] != ObddNode::Terminal(false) || nodes[1] != ObddNode::Terminal(true) {
            return Err("node list must start with the false and true terminals".into());
        }
        let level = levels(&order, legend.len())?;
        for (i, n) in nodes.iter().enumerate().skip(2) {
            match *n {
                ObddNode::Terminal(_) => return Err(format!("node {i}: repeated terminal")),
                ObddNode::Decision { var, lo, hi } => {
                    if var >= legend.len() {
                        return Err(format!("node {i}: variable {var} out of range"));
                    }
                    if lo as usize >= i || hi as usize >= i {
                        return Err(format!("node {i}: child does not precede its parent"));
                    }
                }
            }
        }
        if root as usize >= nodes.len() {
            return Err("root out of range".into());
        }
        Ok(Obdd { nodes, root, order, level, legend })
    }

    /// Keep only the nodes reachable from `root`, renumbered children first.
    fn compact(nodes: &[ObddNode], root: u32, order: Vec<usize>, legend: Legend) -> Obdd {
        let level = levels(&order, legend.len()).expect("order is a permutation");
        let mut remap: HashMap<u32, u32> = HashMap::from([(FALSE, FALSE), (TRUE, TRUE)]);
        let mut out = vec![ObddNode::Terminal(false), ObddNode::Terminal(true)];
        let mut stack = vec![(root, false)];
        while let Some((x, done)) = stack.pop() {
            if remap.contains_key(&x) {
                continue;
            }
            let ObddNode::Decision { var, lo, hi } = nodes[x as usize] else { unreachable!() };
            if done {
                out.push(ObddNode::Decision { var, lo: remap[&lo], hi: remap[&hi] });
                remap.insert(x, out.len() as u32 - 1);
            } else {
                stack.push((x, true));
                stack.push((hi, false));
                stack.push((lo, false));
            }
        }
        Obdd { nodes: out, root: remap[&root], order, level, legend }
    }

    pub fn constant(value: bool, order: Vec<usize>, legend: Legend) -> Obdd {
        ObddBuilder::new().finish(u32::from(value), order, legend)
    }

    pub fn literal(var: usize, positive: bool, order: Vec<usize>, legend: Legend) -> Obdd {
        let mut b = ObddBuilder::new();
        let root = if positive { b.mk(var, FALSE, TRUE) } else { b.mk(var, TRUE, FALSE) };
        b.finish(root, order, legend)
    }

    /// Disjunction of positive literals.
    pub fn clause(vars: &[usize], order: Vec<usize>, legend: Legend) -> Obdd {
        let level = levels(&order, legend.len()).expect("order is a permutation");
        let mut sorted = vars.to_vec();
        sorted.sort_by_key(|&v| level[v]);
        sorted.dedup();
        let mut b = ObddBuilder::new();
        let mut root = FALSE;
        for &v in sorted.iter().rev() {
            root = b.mk(v, root, TRUE);
        }
        b.finish(root, order, legend)
    }

    pub fn nodes(&self) -> &[ObddNode] {
        &self.nodes
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn legend(&self) -> &Legend {
        &self.legend
    }

    fn level_of(&self, x: u32) -> usize {
        match self.nodes[x as usize] {
            ObddNode::Terminal(_) => self.order.len(),
            ObddNode::Decision { var, .. } => self.level[var],
        }
    }

    fn reachable_mask(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(x) = stack.pop() {
            if std::mem::replace(&mut seen[x as usize], true) {
                continue;
            }
            if let ObddNode::Decision { lo, hi, .. } = self.nodes[x as usize] {
                stack.push(lo);
                stack.push(hi);
            }
        }
        seen
    }

    /// Distinct reachable nodes, terminals included.
    pub fn size(&self) -> usize {
        self.reachable_mask().iter().filter(|&&b| b).count()
    }

    /// Reachable decision nodes testing each level's variable.
    pub fn level_widths(&self) -> Vec<usize> {
        let mut w = vec![0; self.order.len()];
        for (x, seen) in self.reachable_mask().into_iter().enumerate() {
            if seen {
                if let ObddNode::Decision { var, .. } = self.nodes[x] {
                    w[self.level[var]] += 1;
                }
            }
        }
        w
    }

    pub fn max_level_width(&self) -> usize {
        self.level_widths().into_iter().max().unwrap_or(0)
    }

    pub fn evaluate(&self, bits: &[bool]) -> bool {
        let mut x = self.root;
        loop {
            match self.nodes[x as usize] {
                ObddNode::Terminal(b) => return b,
                ObddNode::Decision { var, lo, hi } => x = if bits[var] { hi } else { lo },
            }
        }
    }

    /// Every reachable decision node tests a variable strictly earlier than
    /// its children do.
    pub fn is_ordered(&self) -> bool {
        self.reachable_mask().iter().enumerate().all(|(x, &seen)| match self.nodes[x] {
            ObddNode::Decision { lo, hi, .. } if seen => {
                let l = self.level_of(x as u32);
                l < self.level_of(lo) && l < self.level_of(hi)
            }
            _ => true,
        })
    }

    pub fn is_reduced(&self) -> bool {
        let mut seen = HashMap::new();
        self.reachable_mask().iter().enumerate().all(|(x, &r)| match self.nodes[x] {
            ObddNode::Decision { var, lo, hi } if r => lo != hi && seen.insert((var, lo, hi), x).is_none(),
            _ => true,
        })
    }

    /// The equivalent reduced diagram over the same order.
    pub fn reduce(&self) -> Obdd {
        let mut b = ObddBuilder::new();
        let mut map = vec![u32::MAX; self.nodes.len()];
        let mask = self.reachable_mask();
        for (x, n) in self.nodes.iter().enumerate() {
            if !mask[x] {
                continue;
            }
            map[x] = match *n {
                ObddNode::Terminal(v) => u32::from(v),
                ObddNode::Decision { var, lo, hi } => b.mk(var, map[lo as usize], map[hi as usize]),
            };
        }
        b.finish(map[self.root as usize], self.order.clone(), self.legend.clone())
    }

    pub fn negate(&self) -> Obdd {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match *n {
                ObddNode::Terminal(v) => ObddNode::Terminal(v),
                ObddNode::Decision { var, lo, hi } => ObddNode::Decision {
                    var,
                    lo: flip(lo),
                    hi: flip(hi),
                },
            })
            .collect::<Vec<_>>();
        Obdd { nodes, root: flip(self.root), ..self.clone() }
    }

    /// Reduces and checks that the result is one of the two constants.
    pub fn as_constant(&self) -> Option<bool> {
        match self.reduce().nodes[self.reduce().root as usize] {
            ObddNode::Terminal(v) => Some(v),
            ObddNode::Decision { .. } => None,
        }
    }
}

fn flip(x: u32) -> u32 {
    match x {
        FALSE => TRUE,
        TRUE => FALSE,
        other => other,
    }
}

fn levels(order: &[usize], n: usize) -> Result<Vec<usize>, String> {
    let mut level = vec![usize::MAX; n];
    if order.len() != n {
        return Err(format!("order lists {} of {n} variables", order.len()));
    }
    for (i, &v) in order.iter().enumerate() {
        if v >= n || level[v] != usize::MAX {
            return Err(format!("order repeats or misnames variable {v}"));
        }
        level[v] = i;
    }
    Ok(level)
}

/// Reduced diagram of `a op b`; both must share one order.
pub fn obdd_apply(a: &Obdd, b: &Obdd, op: BoolOp) -> Result<Obdd, ObddError> {
    if a.order != b.order {
        return Err(ObddError::OrderMismatch);
    }
    let mut builder = ObddBuilder::new();
    let mut memo: HashMap<(u32, u32), u32> = HashMap::new();
    let root = apply_rec(a, b, op, a.root, b.root, &mut builder, &mut memo);
    Ok(builder.finish(root, a.order.clone(), a.legend.clone()))
}

fn apply_rec(
    a: &Obdd,
    b: &Obdd,
    op: BoolOp,
    u: u32,
    v: u32,
    out: &mut ObddBuilder,
    memo: &mut HashMap<(u32, u32), u32>,
) -> u32 {
    if let (ObddNode::Terminal(x), ObddNode::Terminal(y)) = (a.nodes[u as usize], b.nodes[v as usize]) {
        return u32::from(op.apply(x, y));
    }
    if let Some(&r) = memo.get(&(u, v)) {
        return r;
    }
    let (lu, lv) = (a.level_of(u), b.level_of(v));
    let l = lu.min(lv);
    let split = |d: &Obdd, x: u32, lx: usize| match d.nodes[x as usize] {
        ObddNode::Decision { lo, hi, .. } if lx == l => (lo, hi),
        _ => (x, x),
    };
    let (u0, u1) = split(a, u, lu);
    let (v0, v1) = split(b, v, lv);
    let lo = apply_rec(a, b, op, u0, v0, out, memo);
    let hi = apply_rec(a, b, op, u1, v1, out, memo);
    let r = out.mk(a.order[l], lo, hi);
    memo.insert((u, v), r);
    r
}

impl Diagram for Obdd {
    fn legend(&self) -> &Legend {
        &self.legend
    }

    fn evaluate_bits(&self, bits: &[bool]) -> bool {
        self.evaluate(bits)
    }

    fn raw_model_count(&self) -> BigUint {
        let mask = self.reachable_mask();
        let mut counts = vec![BigUint::zero(); self.nodes.len()];
        for (x, n) in self.nodes.iter().enumerate() {
            if !mask[x] {
                continue;
            }
            counts[x] = match *n {
                ObddNode::Terminal(v) => BigUint::from(u32::from(v)),
                ObddNode::Decision { lo, hi, .. } => {
                    let l = self.level_of(x as u32) + 1;
                    (&counts[lo as usize] << (self.level_of(lo) - l)) + (&counts[hi as usize] << (self.level_of(hi) - l))
                }
            };
        }
        &counts[self.root as usize] << self.level_of(self.root)
    }

    fn min_cost_model(&self, cost: &[bool], fixed: &[Option<bool>]) -> Option<Vec<bool>> {
        // forced[l]: costed variables pinned true at levels before `l`.
        let mut forced = vec![0usize; self.order.len() + 1];
        for (l, &v) in self.order.iter().enumerate() {
            forced[l + 1] = forced[l] + usize::from(cost[v] && fixed[v] == Some(true));
        }
        let gap = |from: usize, to: usize| forced[to] - forced[from];
        let mask = self.reachable_mask();
        let mut mins = vec![INF; self.nodes.len()];
        let mut pick_hi = vec![false; self.nodes.len()];
        for (x, n) in self.nodes.iter().enumerate() {
            if !mask[x] {
                continue;
            }
            mins[x] = match *n {
                ObddNode::Terminal(v) => if v { 0 } else { INF },
                ObddNode::Decision { var, lo, hi } => {
                    let l = self.level_of(x as u32) + 1;
                    let low = if fixed[var] == Some(true) {
                        INF
                    } else {
                        (mins[lo as usize] + gap(l, self.level_of(lo))).min(INF)
                    };
                    let high = if fixed[var] == Some(false) {
                        INF
                    } else {
                        (mins[hi as usize] + gap(l, self.level_of(hi)) + usize::from(cost[var])).min(INF)
                    };
                    pick_hi[x] = high < low;
                    low.min(high)
                }
            };
        }
        if mins[self.root as usize] >= INF {
            return None;
        }
        let mut bits: Vec<bool> = fixed.iter().map(|f| f.unwrap_or(false)).collect();
        let mut x = self.root;
        while let ObddNode::Decision { var, lo, hi } = self.nodes[x as usize] {
            bits[var] = pick_hi[x as usize];
            x = if pick_hi[x as usize] { hi } else { lo };
        }
        Some(bits)
    }
}
