//! Sentential decision diagrams over a v-tree, and their compilation from
//! the state machine along a nice tree decomposition.

mod compile;
mod vtree;

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::assignment::Legend;
use crate::query::Diagram;

pub use compile::{compile_sdd, compile_sdd_instance, context_assignment_mapping, SddCompilation, StateSddMapping};
pub use vtree::{VNode, VTree, VTreeBuilder};

pub const FALSE: u32 = 0;
pub const TRUE: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SddNode {
    False,
    True,
    Literal { var: usize, positive: bool },
    /// `(prime, sub)` pairs sorted by prime id, at v-tree node `vnode`.
    Decomposition { vnode: usize, elements: Vec<(u32, u32)> },
}

/// Hash-consed node store. Ids `FALSE` and `TRUE` are the terminals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SddManager {
    nodes: Vec<SddNode>,
    unique: HashMap<SddNode, u32>,
}

impl Default for SddManager {
    fn default() -> Self {
        SddManager::new()
    }
}

impl SddManager {
    pub fn new() -> SddManager {
        let mut m = SddManager { nodes: Vec::new(), unique: HashMap::new() };
        m.intern(SddNode::False);
        m.intern(SddNode::True);
        m
    }

    fn intern(&mut self, n: SddNode) -> u32 {
        if let Some(&id) = self.unique.get(&n) {
            return id;
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(n.clone());
        self.unique.insert(n, id);
        id
    }

    pub fn literal(&mut self, var: usize, positive: bool) -> u32 {
        self.intern(SddNode::Literal { var, positive })
    }

    /// Elements with a false prime are dropped; an empty decomposition is
    /// false.
    pub fn decomposition(&mut self, vnode: usize, elements: &[(u32, u32)]) -> u32 {
        let mut elements: Vec<(u32, u32)> = elements.iter().copied().filter(|e| e.0 != FALSE).collect();
        if elements.is_empty() {
            return FALSE;
        }
        elements.sort_unstable();
        elements.dedup();
        self.intern(SddNode::Decomposition { vnode, elements })
    }

    pub fn nodes(&self) -> &[SddNode] {
        &self.nodes
    }

    pub fn node(&self, id: u32) -> &SddNode {
        &self.nodes[id as usize]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// An SDD with its v-tree and variable legend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sdd {
    pub manager: SddManager,
    pub vtree: VTree,
    pub legend: Legend,
    pub root: u32,
}

const INF: usize = usize::MAX / 4;

impl Sdd {
    /// Rebuild from a node list where children precede parents and ids 0
    /// and 1 are the terminals.
    pub fn from_nodes(nodes: Vec<SddNode>, root: u32, vtree: VTree, legend: Legend) -> Result<Sdd, String> {
        if nodes.len() < 2 || nodes[0] != SddNode::False || nodes[1] != SddNode::True {
            return Err("node list must start with the two terminals".into());
        }
        let mut manager = SddManager::new();
        let mut remap = vec![FALSE, TRUE];
        for (i, n) in nodes.iter().enumerate().skip(2) {
            let id = match n {
                SddNode::Literal { var, positive } => {
                    if *var >= legend.len() {
                        return Err(format!("node {i}: variable {var} out of range"));
                    }
                    manager.literal(*var, *positive)
                }
                SddNode::Decomposition { vnode, elements } => {
                    if *vnode >= vtree.nodes().len() {
                        return Err(format!("node {i}: v-tree node {vnode} out of range"));
                    }
                    let mut mapped = Vec::with_capacity(elements.len());
                    for &(p, s) in elements {
                        if p as usize >= i || s as usize >= i {
                            return Err(format!("node {i}: child does not precede its parent"));
                        }
                        mapped.push((remap[p as usize], remap[s as usize]));
                    }
                    manager.decomposition(*vnode, &mapped)
                }
                SddNode::False | SddNode::True => return Err(format!("node {i}: repeated terminal")),
            };
            remap.push(id);
        }
        let root = *remap.get(root as usize).ok_or("root out of range")?;
        Ok(Sdd { manager, vtree, legend, root })
    }

    /// Nodes reachable from the root in children-first order.
    pub fn reachable(&self) -> Vec<u32> {
        let mut seen = vec![false; self.manager.len()];
        let mut out = Vec::new();
        let mut stack = vec![(self.root, false)];
        while let Some((x, done)) = stack.pop() {
            if done {
                out.push(x);
                continue;
            }
            if seen[x as usize] {
                continue;
            }
            seen[x as usize] = true;
            stack.push((x, true));
            if let SddNode::Decomposition { elements, .. } = self.manager.node(x) {
                for &(p, s) in elements.iter().rev() {
                    for c in [s, p] {
                        if !seen[c as usize] {
                            stack.push((c, false));
                        }
                    }
                }
            }
        }
        out
    }

    /// One per terminal or literal plus the element count of every
    /// decomposition, over the distinct reachable nodes.
    pub fn size(&self) -> usize {
        self.reachable()
            .iter()
            .map(|&x| match self.manager.node(x) {
                SddNode::Decomposition { elements, .. } => elements.len(),
                _ => 1,
            })
            .sum()
    }

    /// Value of every node under `bits`, indexed by node id.
    fn eval_all(&self, bits: &[bool], order: &[u32], out: &mut [bool]) {
        for &x in order {
            out[x as usize] = match self.manager.node(x) {
                SddNode::False => false,
                SddNode::True => true,
                SddNode::Literal { var, positive } => bits[*var] == *positive,
                SddNode::Decomposition { elements, .. } => elements
                    .iter()
                    .find(|e| out[e.0 as usize])
                    .is_some_and(|e| out[e.1 as usize]),
            };
        }
    }

    pub fn evaluate(&self, bits: &[bool]) -> bool {
        self.eval_node(self.root, bits)
    }

    pub fn eval_node(&self, x: u32, bits: &[bool]) -> bool {
        let mut memo = HashMap::new();
        self.eval_memo(x, bits, &mut memo)
    }

    fn eval_memo(&self, x: u32, bits: &[bool], memo: &mut HashMap<u32, bool>) -> bool {
        if let Some(&v) = memo.get(&x) {
            return v;
        }
        let v = match self.manager.node(x) {
            SddNode::False => false,
            SddNode::True => true,
            SddNode::Literal { var, positive } => bits[*var] == *positive,
            SddNode::Decomposition { elements, .. } => elements
                .iter()
                .find(|e| self.eval_memo(e.0, bits, memo))
                .is_some_and(|e| self.eval_memo(e.1, bits, memo)),
        };
        memo.insert(x, v);
        v
    }

    fn vnode(&self, x: u32) -> Option<usize> {
        match self.manager.node(x) {
            SddNode::False | SddNode::True => None,
            SddNode::Literal { var, .. } => Some(self.vtree.leaf_of(*var)),
            SddNode::Decomposition { vnode, .. } => Some(*vnode),
        }
    }

    /// Every decomposition sits at an internal v-tree node whose left
    /// subtree holds its primes and right subtree its subs; every literal
    /// sits at its variable's leaf.
    pub fn respects_vtree(&self) -> Result<(), String> {
        for x in self.reachable() {
            let SddNode::Decomposition { vnode, elements } = self.manager.node(x) else {
                continue;
            };
            let Some((l, r)) = self.vtree.children(*vnode) else {
                return Err(format!("node {x} decomposes at a v-tree leaf"));
            };
            for &(p, s) in elements {
                if self.vnode(p).is_some_and(|u| !self.vtree.contains(l, u)) {
                    return Err(format!("node {x}: prime {p} outside the left subtree"));
                }
                if self.vnode(s).is_some_and(|u| !self.vtree.contains(r, u)) {
                    return Err(format!("node {x}: sub {s} outside the right subtree"));
                }
            }
        }
        Ok(())
    }

    /// No literal mentions a dummy variable, so the function does not
    /// depend on them.
    pub fn ignores_dummies(&self) -> bool {
        let n = self.legend.decision_count();
        self.reachable()
            .iter()
            .all(|&x| !matches!(self.manager.node(x), SddNode::Literal { var, .. } if *var >= n))
    }

    /// Exhaustive over the decision variables with dummies false: under
    /// every assignment, every decomposition has exactly one true prime.
    /// Sound as a partition check when [`Sdd::ignores_dummies`] holds.
    pub fn check_partitions(&self, max_vars: usize) -> Result<(), String> {
        let n = self.legend.decision_count();
        if n > max_vars {
            return Err(format!("{n} decision variables exceed {max_vars}"));
        }
        let order = self.reachable();
        let mut bits = vec![false; self.legend.len()];
        let mut val = vec![false; self.manager.len()];
        for a in 0..1u64 << n {
            for (i, b) in bits.iter_mut().enumerate().take(n) {
                *b = a >> i & 1 == 1;
            }
            self.eval_all(&bits, &order, &mut val);
            for &x in &order {
                if let SddNode::Decomposition { elements, .. } = self.manager.node(x) {
                    let hits = elements.iter().filter(|e| val[e.0 as usize]).count();
                    if hits != 1 {
                        return Err(format!("node {x}: {hits} true primes under assignment {a:#b}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Models of node `x` within the scope of v-tree node `u`.
    fn count_in(&self, x: u32, u: usize, counts: &[BigUint]) -> BigUint {
        let scope = self.vtree.scope_len(u);
        match self.vnode(x) {
            None if x == TRUE => BigUint::one() << scope,
            None => BigUint::zero(),
            Some(v) => &counts[x as usize] << (scope - self.vtree.scope_len(v)),
        }
    }

    fn min_in(&self, x: u32, u: usize, mins: &[usize], forced: &[usize]) -> usize {
        match self.vnode(x) {
            None if x == TRUE => forced[u],
            None => INF,
            Some(v) => (mins[x as usize] + forced[u] - forced[v]).min(INF),
        }
    }

    /// Per v-tree node: variables in scope that are fixed true and costed.
    fn forced_costs(&self, cost: &[bool], fixed: &[Option<bool>]) -> Vec<usize> {
        (0..self.vtree.nodes().len())
            .map(|v| {
                self.vtree
                    .scope(v)
                    .iter()
                    .filter(|&&i| cost[i] && fixed[i] == Some(true))
                    .count()
            })
            .collect()
    }
}

impl Diagram for Sdd {
    fn legend(&self) -> &Legend {
        &self.legend
    }

    fn evaluate_bits(&self, bits: &[bool]) -> bool {
        self.evaluate(bits)
    }

    fn raw_model_count(&self) -> BigUint {
        let mut counts = vec![BigUint::zero(); self.manager.len()];
        for x in self.reachable() {
            counts[x as usize] = match self.manager.node(x) {
                SddNode::False => BigUint::zero(),
                SddNode::True => BigUint::one(),
                SddNode::Literal { .. } => BigUint::one(),
                SddNode::Decomposition { vnode, elements } => {
                    let (l, r) = self.vtree.children(*vnode).expect("respects the v-tree");
                    elements
                        .iter()
                        .map(|&(p, s)| self.count_in(p, l, &counts) * self.count_in(s, r, &counts))
                        .sum()
                }
            };
        }
        self.count_in(self.root, self.vtree.root(), &counts)
    }

    fn min_cost_model(&self, cost: &[bool], fixed: &[Option<bool>]) -> Option<Vec<bool>> {
        let forced = self.forced_costs(cost, fixed);
        let mut mins = vec![INF; self.manager.len()];
        let mut choice = vec![usize::MAX; self.manager.len()];
        for x in self.reachable() {
            mins[x as usize] = match self.manager.node(x) {
                SddNode::False | SddNode::True => continue,
                SddNode::Literal { var, positive } => match fixed[*var] {
                    Some(f) if f != *positive => INF,
                    _ => usize::from(*positive && cost[*var]),
                },
                SddNode::Decomposition { vnode, elements } => {
                    let (l, r) = self.vtree.children(*vnode).expect("respects the v-tree");
                    let mut best = INF;
                    for (i, &(p, s)) in elements.iter().enumerate() {
                        let c = (self.min_in(p, l, &mins, &forced) + self.min_in(s, r, &mins, &forced)).min(INF);
                        if c < best {
                            best = c;
                            choice[x as usize] = i;
                        }
                    }
                    best
                }
            };
        }
        if self.min_in(self.root, self.vtree.root(), &mins, &forced) >= INF {
            return None;
        }
        let mut bits: Vec<bool> = fixed.iter().map(|f| f.unwrap_or(false)).collect();
        let mut stack = vec![self.root];
        while let Some(x) = stack.pop() {
            match self.manager.node(x) {
                SddNode::Literal { var, positive } => bits[*var] = *positive,
                SddNode::Decomposition { elements, .. } => {
                    let (p, s) = elements[choice[x as usize]];
                    stack.push(p);
                    stack.push(s);
                }
                SddNode::False | SddNode::True => {}
            }
        }
        Some(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mso::Sort;
    use crate::query::{min_cardinality_model, model_count};

    /// `(a ∧ ¬b ∧ (c ∨ d)) ∨ (¬a ∧ c)` over v-tree `((a, b), (c, d))`.
    fn example() -> Sdd {
        let free = vec![("X".to_string(), Sort::VertexSet)];
        let legend = Legend::from_parts(free, 4, 0, Vec::new()).unwrap();
        let mut b = VTreeBuilder::default();
        let (la, lb, lc, ld) = (b.leaf(0), b.leaf(1), b.leaf(2), b.leaf(3));
        let ab = b.internal(la, lb);
        let cd = b.internal(lc, ld);
        let root = b.internal(ab, cd);
        let vtree = b.finish(root, 4).unwrap();
        let mut m = SddManager::new();
        let (a, na) = (m.literal(0, true), m.literal(0, false));
        let (bb, nb) = (m.literal(1, true), m.literal(1, false));
        let (c, nc) = (m.literal(2, true), m.literal(2, false));
        let d = m.literal(3, true);
        let a_nb = m.decomposition(ab, &[(a, nb), (na, FALSE)]);
        let a_b = m.decomposition(ab, &[(a, bb), (na, FALSE)]);
        let c_or_d = m.decomposition(cd, &[(c, TRUE), (nc, d)]);
        let top = m.decomposition(root, &[(a_nb, c_or_d), (na, c), (a_b, FALSE)]);
        Sdd { manager: m, vtree, legend, root: top }
    }

    fn reference(x: &[bool]) -> bool {
        (x[0] && !x[1] && (x[2] || x[3])) || (!x[0] && x[2])
    }

    #[test]
    fn evaluates_the_example() {
        let s = example();
        assert!(s.evaluate(&[true, false, false, true]));
        for a in 0..16u32 {
            let bits: Vec<bool> = (0..4).map(|i| a >> i & 1 == 1).collect();
            assert_eq!(s.evaluate(&bits), reference(&bits));
        }
        assert!(s.respects_vtree().is_ok());
        assert!(s.check_partitions(4).is_ok());
        assert_eq!(model_count(&s), BigUint::from(7u32));
    }

    #[test]
    fn sizes() {
        let s = example();
        // Terminals, 7 literals, decompositions of 2 + 2 + 2 + 3 elements.
        assert_eq!(s.size(), 2 + 7 + 9);
        let mut t = s.clone();
        t.root = TRUE;
        assert_eq!(t.size(), 1);
    }

    #[test]
    fn shared_subs_count_once() {
        let legend = Legend::from_parts(vec![("X".into(), Sort::VertexSet)], 2, 0, Vec::new()).unwrap();
        let mut b = VTreeBuilder::default();
        let (l0, l1) = (b.leaf(0), b.leaf(1));
        let r = b.internal(l0, l1);
        let vtree = b.finish(r, 2).unwrap();
        let mut m = SddManager::new();
        let (x, nx) = (m.literal(0, true), m.literal(0, false));
        let y = m.literal(1, true);
        let root = m.decomposition(r, &[(x, y), (nx, y)]);
        let s = Sdd { manager: m, vtree, legend, root };
        // The tree unfolding would count `y` twice.
        assert_eq!(s.size(), 2 + 1 + 1 + 1);
    }

    #[test]
    fn minimum_cardinality() {
        let s = example();
        let r = min_cardinality_model(&s, &[0, 1, 2, 3], &[]).unwrap();
        assert_eq!(r.cardinality, 1);
        assert_eq!(r.bits, vec![false, false, true, false]);
        let r = min_cardinality_model(&s, &[0, 1, 2, 3], &[2]).unwrap();
        assert_eq!(r.bits, vec![true, false, false, true]);
    }

    #[test]
    fn partition_violation_is_reported() {
        let mut s = example();
        let (a, b) = (s.manager.literal(0, true), s.manager.literal(1, true));
        s.root = s.manager.decomposition(6, &[(a, TRUE), (b, TRUE)]);
        assert!(s.check_partitions(4).is_err());
    }
}
