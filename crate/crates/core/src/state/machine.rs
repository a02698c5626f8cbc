use std::collections::HashMap;

use super::{color_state, full_mask, BitVector, SpaceNode, State, StatePair, StateSpace, INIT, TRUE};
use crate::mso::{Sort, VarId};

/// A variable of a quantifier block. Object variables carry their bit in the
/// block's assignment vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundVar {
    pub var: VarId,
    pub sort: Sort,
    pub bit: Option<u8>,
}

/// The graph-dependent part of a forget node that transitions may look at:
/// the color of the forgotten vertex and, per forgotten edge in order, the
/// color of its other endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    pub vertex_color: u32,
    pub edge_colors: Vec<u32>,
}

/// All ways to extend a context valuation to the variables of a quantifier
/// block at a node forgetting one vertex and `n_edges` edges. Each entry
/// gives a mask per block variable (bit 0 for the vertex, bit `i` for the
/// `i`-th edge) and the updated assignment bits. Variables are processed in
/// block order.
pub fn get_all_consistent_extensions(block: &[BoundVar], b: u64, n_edges: usize) -> Vec<(Vec<u64>, u64)> {
    let mut current: Vec<(Vec<u64>, u64)> = vec![(Vec::with_capacity(block.len()), b)];
    for v in block {
        let mut next = Vec::new();
        for (masks, bits) in current {
            let mut add = |m: u64, bits: u64| {
                let mut masks = masks.clone();
                masks.push(m);
                next.push((masks, bits));
            };
            match (v.sort, v.bit) {
                (Sort::Vertex, Some(bit)) => {
                    add(0, bits);
                    if bits >> bit & 1 == 0 {
                        add(1, bits | 1 << bit);
                    }
                }
                (Sort::Edge, Some(bit)) => {
                    add(0, bits);
                    if bits >> bit & 1 == 0 {
                        for e in 0..n_edges {
                            add(1 << e, bits | 1 << bit);
                        }
                    }
                }
                (Sort::VertexSet, _) => {
                    add(0, bits);
                    add(1, bits);
                }
                (Sort::EdgeSet, _) => {
                    for m in 0..1u64 << n_edges {
                        add(m, bits);
                    }
                }
                (_, None) => unreachable!("object variable without a bit"),
            }
        }
        current = next;
    }
    current
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Pair(u32, u32),
    Set(Box<[(u32, u64)]>),
    Bits(Option<u64>),
}

#[derive(Debug, Default)]
struct Table {
    keys: Vec<Key>,
    ids: HashMap<Key, u32>,
}

impl Table {
    fn intern(&mut self, k: Key) -> u32 {
        if let Some(&id) = self.ids.get(&k) {
            return id;
        }
        let id = self.keys.len() as u32;
        self.keys.push(k.clone());
        self.ids.insert(k, id);
        id
    }
}

type ForgetKey = (u32, u32, Box<[u64]>);

/// Evaluates transitions of one [`StateSpace`], interning composite states
/// per space node and memoizing forget and join results.
///
/// A valuation passed to [`Machine::forget`] holds one mask per formula
/// variable: bit 0 of a vertex-sorted variable is its decision variable for
/// the forgotten vertex, bit `i` of an edge-sorted variable is the one for
/// the `i`-th forgotten edge.
#[derive(Debug)]
pub struct Machine<'s> {
    space: &'s StateSpace,
    tables: Vec<Table>,
    forget_memo: Vec<HashMap<ForgetKey, u32>>,
    join_memo: Vec<HashMap<(u32, u32), u32>>,
    sigs: Vec<Signature>,
    sig_ids: HashMap<Signature, u32>,
    cannot_occur: u64,
}

impl<'s> Machine<'s> {
    pub fn new(space: &'s StateSpace) -> Machine<'s> {
        let n = space.nodes().len();
        Machine {
            space,
            tables: (0..n).map(|_| Table::default()).collect(),
            forget_memo: vec![HashMap::new(); n],
            join_memo: vec![HashMap::new(); n],
            sigs: Vec::new(),
            sig_ids: HashMap::new(),
            cannot_occur: 0,
        }
    }

    pub fn space(&self) -> &'s StateSpace {
        self.space
    }

    /// How often an adjacency join met two non-initial states.
    pub fn cannot_occur_consults(&self) -> u64 {
        self.cannot_occur
    }

    /// Number of distinct states interned so far at a composite node.
    pub fn interned(&self, node: usize) -> usize {
        self.tables[node].keys.len()
    }

    pub fn signature(&mut self, sig: &Signature) -> u32 {
        if let Some(&id) = self.sig_ids.get(sig) {
            return id;
        }
        let id = self.sigs.len() as u32;
        self.sigs.push(sig.clone());
        self.sig_ids.insert(sig.clone(), id);
        id
    }

    pub fn initial(&mut self, node: usize) -> u32 {
        match self.space.node(node) {
            SpaceNode::Eq { .. } | SpaceNode::In { .. } | SpaceNode::Adj { .. } => INIT,
            &SpaceNode::Not(a) => self.initial(a),
            &SpaceNode::And(a, b)
            | &SpaceNode::Extended { formula: a, consistency: b } => {
                let (a, b) = (self.initial(a), self.initial(b));
                self.tables[node].intern(Key::Pair(a, b))
            }
            &SpaceNode::Exists { body, .. } => {
                let s = self.initial(body);
                self.tables[node].intern(Key::Set(Box::new([(s, 0)])))
            }
            SpaceNode::Consistency { .. } => self.tables[node].intern(Key::Bits(Some(0))),
        }
    }

    pub fn accepting(&self, node: usize, s: u32) -> bool {
        match self.space.node(node) {
            SpaceNode::Eq { .. } | SpaceNode::In { .. } | SpaceNode::Adj { .. } => s == TRUE,
            &SpaceNode::Not(a) => !self.accepting(a, s),
            &SpaceNode::And(a, b) | &SpaceNode::Extended { formula: a, consistency: b } => {
                let Key::Pair(x, y) = self.tables[node].keys[s as usize] else { unreachable!() };
                self.accepting(a, x) && self.accepting(b, y)
            }
            SpaceNode::Exists { block, body } => {
                let full = full_mask(block.iter().filter(|v| v.bit.is_some()).count());
                let Key::Set(pairs) = &self.tables[node].keys[s as usize] else { unreachable!() };
                pairs.iter().any(|&(t, b)| b == full && self.accepting(*body, t))
            }
            SpaceNode::Consistency { objects } => {
                self.tables[node].keys[s as usize] == Key::Bits(Some(full_mask(objects.len())))
            }
        }
    }

    /// Forget transition at `node` from state `s`; `sig` comes from
    /// [`Machine::signature`].
    pub fn forget(&mut self, node: usize, s: u32, sig: u32, masks: &mut [u64]) -> u32 {
        match *self.space.node(node) {
            SpaceNode::Eq { x, y, .. } => {
                if s == TRUE || masks[x.index()] & masks[y.index()] != 0 {
                    TRUE
                } else {
                    INIT
                }
            }
            SpaceNode::In { x, set, .. } => {
                if s == TRUE || masks[x.index()] & masks[set.index()] != 0 {
                    TRUE
                } else {
                    INIT
                }
            }
            SpaceNode::Adj { x, y } => self.forget_adj(s, sig, masks[x.index()], masks[y.index()]),
            SpaceNode::Not(a) => self.forget(a, s, sig, masks),
            SpaceNode::Consistency { .. } => self.forget_consistency(node, s, masks),
            _ => {
                let key: ForgetKey = (
                    s,
                    sig,
                    self.space.free_vars(node).iter().map(|v| masks[v.index()]).collect(),
                );
                if let Some(&r) = self.forget_memo[node].get(&key) {
                    return r;
                }
                let r = self.forget_composite(node, s, sig, masks);
                self.forget_memo[node].insert(key, r);
                r
            }
        }
    }

    fn forget_adj(&self, s: u32, sig: u32, x: u64, y: u64) -> u32 {
        let sig = &self.sigs[sig as usize];
        if s == TRUE {
            return TRUE;
        }
        if s != INIT {
            let i = s - 1;
            if i == sig.vertex_color {
                return if x & 1 == 1 { TRUE } else { INIT };
            }
            return s;
        }
        if y != 0 && x & 1 == 1 {
            return TRUE;
        }
        if y != 0 {
            return color_state(sig.edge_colors[y.trailing_zeros() as usize]);
        }
        INIT
    }

    fn forget_consistency(&mut self, node: usize, s: u32, masks: &[u64]) -> u32 {
        let SpaceNode::Consistency { objects } = self.space.node(node) else { unreachable!() };
        let Key::Bits(Some(mut bits)) = self.tables[node].keys[s as usize] else {
            return s;
        };
        let mut out = Some(());
        for (j, (v, _)) in objects.iter().enumerate() {
            let m = masks[v.index()];
            for _ in 0..m.count_ones() {
                if bits >> j & 1 == 1 {
                    out = None;
                    break;
                }
                bits |= 1 << j;
            }
            if out.is_none() {
                break;
            }
        }
        let key = Key::Bits(out.map(|_| bits));
        self.tables[node].intern(key)
    }

    fn forget_composite(&mut self, node: usize, s: u32, sig: u32, masks: &mut [u64]) -> u32 {
        match self.space.node(node) {
            &SpaceNode::And(a, b) | &SpaceNode::Extended { formula: a, consistency: b } => {
                let Key::Pair(x, y) = self.tables[node].keys[s as usize] else { unreachable!() };
                let x = self.forget(a, x, sig, masks);
                let y = self.forget(b, y, sig, masks);
                self.tables[node].intern(Key::Pair(x, y))
            }
            SpaceNode::Exists { block, body } => {
                let (block, body) = (block.clone(), *body);
                let Key::Set(pairs) = self.tables[node].keys[s as usize].clone() else { unreachable!() };
                let n_edges = self.sigs[sig as usize].edge_colors.len();
                let mut out: Vec<(u32, u64)> = Vec::new();
                let mut by_bits: HashMap<u64, Vec<(Vec<u64>, u64)>> = HashMap::new();
                for &(inner, b) in pairs.iter() {
                    let exts = by_bits
                        .entry(b)
                        .or_insert_with(|| get_all_consistent_extensions(&block, b, n_edges));
                    for (ms, b2) in exts.iter() {
                        for (v, m) in block.iter().zip(ms) {
                            masks[v.var.index()] = *m;
                        }
                        out.push((self.forget(body, inner, sig, masks), *b2));
                    }
                }
                for v in &block {
                    masks[v.var.index()] = 0;
                }
                out.sort_unstable();
                out.dedup();
                self.tables[node].intern(Key::Set(out.into_boxed_slice()))
            }
            _ => unreachable!("atomic nodes are not memoized"),
        }
    }

    pub fn join(&mut self, node: usize, l: u32, r: u32) -> u32 {
        match *self.space.node(node) {
            SpaceNode::Eq { .. } | SpaceNode::In { .. } => {
                if l == INIT && r == INIT {
                    INIT
                } else {
                    TRUE
                }
            }
            SpaceNode::Adj { .. } => {
                if l == INIT {
                    r
                } else if r == INIT {
                    l
                } else {
                    self.cannot_occur += 1;
                    INIT
                }
            }
            SpaceNode::Not(a) => self.join(a, l, r),
            SpaceNode::Consistency { .. } => {
                let (Key::Bits(x), Key::Bits(y)) =
                    (&self.tables[node].keys[l as usize], &self.tables[node].keys[r as usize])
                else {
                    unreachable!()
                };
                let out = match (*x, *y) {
                    (Some(a), Some(b)) if a & b == 0 => Some(a | b),
                    _ => None,
                };
                self.tables[node].intern(Key::Bits(out))
            }
            _ => {
                if let Some(&v) = self.join_memo[node].get(&(l, r)) {
                    return v;
                }
                let v = self.join_composite(node, l, r);
                self.join_memo[node].insert((l, r), v);
                v
            }
        }
    }

    fn join_composite(&mut self, node: usize, l: u32, r: u32) -> u32 {
        match *self.space.node(node) {
            SpaceNode::And(a, b) | SpaceNode::Extended { formula: a, consistency: b } => {
                let Key::Pair(la, lb) = self.tables[node].keys[l as usize] else { unreachable!() };
                let Key::Pair(ra, rb) = self.tables[node].keys[r as usize] else { unreachable!() };
                let x = self.join(a, la, ra);
                let y = self.join(b, lb, rb);
                self.tables[node].intern(Key::Pair(x, y))
            }
            SpaceNode::Exists { body, .. } => {
                let Key::Set(ls) = self.tables[node].keys[l as usize].clone() else { unreachable!() };
                let Key::Set(rs) = self.tables[node].keys[r as usize].clone() else { unreachable!() };
                let mut out = Vec::new();
                for &(sl, bl) in ls.iter() {
                    for &(sr, br) in rs.iter() {
                        if bl & br == 0 {
                            out.push((self.join(body, sl, sr), bl | br));
                        }
                    }
                }
                out.sort_unstable();
                out.dedup();
                self.tables[node].intern(Key::Set(out.into_boxed_slice()))
            }
            _ => unreachable!("atomic nodes are not memoized"),
        }
    }

    /// The state with id `s` at `node` as a value.
    pub fn value(&self, node: usize, s: u32) -> State {
        match self.space.node(node) {
            SpaceNode::Eq { .. } | SpaceNode::In { .. } | SpaceNode::Adj { .. } => match s {
                INIT => State::Init,
                TRUE => State::True,
                c => State::Color(c - 1),
            },
            &SpaceNode::Not(a) => self.value(a, s),
            &SpaceNode::And(a, b) | &SpaceNode::Extended { formula: a, consistency: b } => {
                let Key::Pair(x, y) = self.tables[node].keys[s as usize] else { unreachable!() };
                State::Pair(Box::new(self.value(a, x)), Box::new(self.value(b, y)))
            }
            SpaceNode::Exists { block, body } => {
                let len = block.iter().filter(|v| v.bit.is_some()).count();
                let Key::Set(pairs) = &self.tables[node].keys[s as usize] else { unreachable!() };
                let mut out: Vec<StatePair> = pairs
                    .iter()
                    .map(|&(t, b)| StatePair {
                        inner: self.value(*body, t),
                        assigned: BitVector { len: len as u8, bits: b },
                    })
                    .collect();
                out.sort();
                State::Set(out)
            }
            SpaceNode::Consistency { objects } => {
                let Key::Bits(b) = self.tables[node].keys[s as usize] else { unreachable!() };
                State::Consistency(b.map(|bits| BitVector { len: objects.len() as u8, bits }))
            }
        }
    }

    /// Id of a state value at `node`, or `None` if it does not belong to
    /// the node's space.
    pub fn intern(&mut self, node: usize, state: &State) -> Option<u32> {
        match (self.space.node(node), state) {
            (SpaceNode::Eq { .. } | SpaceNode::In { .. } | SpaceNode::Adj { .. }, State::Init) => Some(INIT),
            (SpaceNode::Eq { .. } | SpaceNode::In { .. } | SpaceNode::Adj { .. }, State::True) => Some(TRUE),
            (SpaceNode::Adj { .. }, &State::Color(i)) if i >= 1 && i as usize <= self.space.width() + 1 => {
                Some(color_state(i))
            }
            (&SpaceNode::Not(a), s) => self.intern(a, s),
            (
                &SpaceNode::And(a, b) | &SpaceNode::Extended { formula: a, consistency: b },
                State::Pair(x, y),
            ) => {
                let x = self.intern(a, x)?;
                let y = self.intern(b, y)?;
                Some(self.tables[node].intern(Key::Pair(x, y)))
            }
            (SpaceNode::Exists { block, body }, State::Set(pairs)) => {
                let len = block.iter().filter(|v| v.bit.is_some()).count();
                let body = *body;
                let mut out = Vec::with_capacity(pairs.len());
                for p in pairs {
                    if p.assigned.len as usize != len || p.assigned.bits & !full_mask(len) != 0 {
                        return None;
                    }
                    out.push((self.intern(body, &p.inner)?, p.assigned.bits));
                }
                out.sort_unstable();
                out.dedup();
                Some(self.tables[node].intern(Key::Set(out.into_boxed_slice())))
            }
            (SpaceNode::Consistency { objects }, State::Consistency(b)) => {
                let len = objects.len();
                match b {
                    Some(v) if v.len as usize != len || v.bits & !full_mask(len) != 0 => None,
                    _ => Some(self.tables[node].intern(Key::Bits(b.map(|v| v.bits)))),
                }
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mso::{desugar, parse_formula};
    use crate::state::build_state_space;

    fn setup(src: &str, w: usize) -> (crate::mso::Formula, StateSpace) {
        let f = desugar(&parse_formula(src).unwrap());
        let s = build_state_space(&f, w).unwrap();
        (f, s)
    }

    fn sig(m: &mut Machine, vc: u32, ec: &[u32]) -> u32 {
        m.signature(&Signature { vertex_color: vc, edge_colors: ec.to_vec() })
    }

    #[test]
    fn equality_forget_and_join() {
        let (_, s) = setup("free vertex x; free vertex y; (x = y)", 1);
        let mut m = Machine::new(&s);
        let g = sig(&mut m, 1, &[]);
        assert_eq!(m.forget(s.root(), INIT, g, &mut [1, 1]), TRUE);
        assert_eq!(m.forget(s.root(), INIT, g, &mut [1, 0]), INIT);
        assert_eq!(m.forget(s.root(), TRUE, g, &mut [0, 0]), TRUE);
        assert_eq!(m.join(s.root(), INIT, TRUE), TRUE);
        assert_eq!(m.join(s.root(), INIT, INIT), INIT);
    }

    #[test]
    fn adjacency_rules() {
        // x is VarId 0, p is VarId 1.
        let (_, s) = setup("free vertex x; free edge p; adj(x, p)", 2);
        let mut m = Machine::new(&s);
        let r = s.root();
        // Forgotten vertex colored 1 with edges to vertices colored 2 and 3.
        let g = sig(&mut m, 1, &[2, 3]);
        // Rule 5: edge chosen, vertex not, remember the other endpoint's color.
        assert_eq!(m.forget(r, INIT, g, &mut [0, 0b10]), color_state(3));
        // Rule 4.
        assert_eq!(m.forget(r, INIT, g, &mut [1, 0b01]), TRUE);
        // Rule 2: color matches the forgotten vertex.
        assert_eq!(m.forget(r, color_state(1), g, &mut [0, 0]), INIT);
        assert_eq!(m.forget(r, color_state(1), g, &mut [1, 0]), TRUE);
        // Rule 3.
        assert_eq!(m.forget(r, color_state(2), g, &mut [1, 0]), color_state(2));
        // Rule 6.
        assert_eq!(m.forget(r, INIT, g, &mut [1, 0]), INIT);
        assert_eq!(m.join(r, color_state(2), INIT), color_state(2));
        assert_eq!(m.cannot_occur_consults(), 0);
        assert_eq!(m.join(r, TRUE, color_state(2)), INIT);
        assert_eq!(m.cannot_occur_consults(), 1);
    }

    #[test]
    fn consistency_rules() {
        let f = parse_formula("free vertex x; free edge p; adj(x, p)").unwrap();
        let s = crate::state::with_consistency(&build_state_space(&f, 1).unwrap(), &f).unwrap();
        let mut m = Machine::new(&s);
        let SpaceNode::Extended { consistency: c, .. } = *s.node(s.root()) else { panic!() };
        let g = sig(&mut m, 1, &[2, 2]);
        let bits = |v: Option<u64>| State::Consistency(v.map(|bits| BitVector { len: 2, bits }));
        let s10 = m.intern(c, &bits(Some(0b01))).unwrap();
        // x already has a value; a second one is an inconsistency.
        let t = m.forget(c, s10, g, &mut [1, 0]);
        assert_eq!(m.value(c, t), bits(None));
        // Two edges for p at once.
        let z = m.initial(c);
        let t = m.forget(c, z, g, &mut [0, 0b11]);
        assert_eq!(m.value(c, t), bits(None));
        let t = m.forget(c, z, g, &mut [1, 0b10]);
        assert_eq!(m.value(c, t), bits(Some(0b11)));
        let a = m.intern(c, &bits(Some(0b01))).unwrap();
        let b = m.intern(c, &bits(Some(0b10))).unwrap();
        let j = m.join(c, a, b);
        assert_eq!(m.value(c, j), bits(Some(0b11)));
        let j = m.join(c, a, a);
        assert_eq!(m.value(c, j), bits(None));
    }

    #[test]
    fn extensions() {
        let v = |sort, bit| BoundVar { var: VarId(0), sort, bit };
        assert_eq!(get_all_consistent_extensions(&[v(Sort::VertexSet, None)], 0, 0).len(), 2);
        assert_eq!(get_all_consistent_extensions(&[v(Sort::Vertex, Some(0))], 1, 3).len(), 1);
        let e = get_all_consistent_extensions(&[v(Sort::Edge, Some(0))], 0, 2);
        assert_eq!(e, vec![(vec![0], 0), (vec![1], 1), (vec![2], 1)]);
        assert_eq!(get_all_consistent_extensions(&[v(Sort::EdgeSet, None)], 0, 3).len(), 8);
    }

    #[test]
    fn quantifier_join_excludes_overlap() {
        let (_, s) = setup("free vset X; exists vertex x. (x in X)", 1);
        let mut m = Machine::new(&s);
        let r = s.root();
        let pair = |inner, bits| StatePair { inner, assigned: BitVector { len: 1, bits } };
        let a = m.intern(r, &State::Set(vec![pair(State::True, 1)])).unwrap();
        let b = m.intern(r, &State::Set(vec![pair(State::Init, 0), pair(State::True, 1)])).unwrap();
        let j = m.join(r, a, b);
        assert_eq!(m.value(r, j), State::Set(vec![pair(State::True, 1)]));
        let j = m.join(r, a, a);
        assert_eq!(m.value(r, j), State::Set(vec![]));
    }
}
