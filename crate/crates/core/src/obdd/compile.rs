use std::collections::HashMap;

use num_bigint::BigUint;

use super::{Obdd, ObddBuilder, ObddError};
use crate::decomp::{Coloring, NiceKind, NiceTreeDecomposition};
use crate::graph::Graph;
use crate::mso::Formula;
use crate::query::{level_width_bound, obdd_size_bound};
use crate::state::{Instance, Machine, Reachability};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum MNode {
    Leaf(u32),
    Decision { var: usize, lo: u32, hi: u32 },
}

/// Multi-terminal diagram with state-labeled leaves; leaves and decision
/// nodes are both shared.
#[derive(Debug, Default)]
struct Mtbdd {
    nodes: Vec<MNode>,
    unique: HashMap<MNode, u32>,
}

impl Mtbdd {
    fn intern(&mut self, n: MNode) -> u32 {
        if let MNode::Decision { lo, hi, .. } = n {
            if lo == hi {
                return lo;
            }
        }
        *self.unique.entry(n).or_insert_with(|| {
            self.nodes.push(n);
            self.nodes.len() as u32 - 1
        })
    }

    /// Full decision tree over `vars` whose leaf for `bits` is `f(bits)`.
    fn tree(&mut self, vars: &[usize], bits: &mut Vec<bool>, f: &mut impl FnMut(&[bool]) -> u32) -> u32 {
        if bits.len() == vars.len() {
            let s = f(bits);
            return self.intern(MNode::Leaf(s));
        }
        let var = vars[bits.len()];
        bits.push(false);
        let lo = self.tree(vars, bits, f);
        bits.pop();
        bits.push(true);
        let hi = self.tree(vars, bits, f);
        bits.pop();
        self.intern(MNode::Decision { var, lo, hi })
    }

    /// Replace every leaf `s` under `x` by `leaf_image(s)`.
    fn substitute(
        &mut self,
        x: u32,
        memo: &mut HashMap<u32, u32>,
        leaf_image: &mut impl FnMut(&mut Mtbdd, u32) -> u32,
    ) -> u32 {
        if let Some(&r) = memo.get(&x) {
            return r;
        }
        let r = match self.nodes[x as usize] {
            MNode::Leaf(s) => leaf_image(self, s),
            MNode::Decision { var, lo, hi } => {
                let lo = self.substitute(lo, memo, leaf_image);
                let hi = self.substitute(hi, memo, leaf_image);
                self.intern(MNode::Decision { var, lo, hi })
            }
        };
        memo.insert(x, r);
        r
    }
}

/// Contexts concatenated from the leaf to the root of a path decomposition.
pub fn path_order(inst: &Instance) -> Result<Vec<usize>, ObddError> {
    let mut order = Vec::with_capacity(inst.legend().decision_count());
    for (p, node) in inst.decomposition().nodes().iter().enumerate() {
        if node.kind == NiceKind::Join {
            return Err(ObddError::NotAPath(p));
        }
        order.extend_from_slice(inst.context_positions(p));
    }
    Ok(order)
}

/// A compiled OBDD with the figures that enter its bounds.
#[derive(Debug, Clone)]
pub struct ObddCompilation {
    pub obdd: Obdd,
    pub reachable_states: usize,
    pub n: usize,
    pub width: usize,
    pub k: usize,
    pub formula_size: usize,
}

impl ObddCompilation {
    pub fn size(&self) -> usize {
        self.obdd.size()
    }

    pub fn bound(&self) -> BigUint {
        obdd_size_bound(self.n, self.k, self.reachable_states)
    }

    pub fn level_bound(&self) -> BigUint {
        level_width_bound(self.reachable_states, self.formula_size, self.width)
    }

    pub fn within_bound(&self) -> bool {
        BigUint::from(self.size()) <= self.bound()
    }

    pub fn within_level_bound(&self) -> bool {
        BigUint::from(self.obdd.max_level_width()) <= self.level_bound()
    }
}

pub fn compile_obdd_instance(
    inst: &Instance,
    m: &mut Machine,
    reach: &Reachability,
) -> Result<ObddCompilation, ObddError> {
    let order = path_order(inst)?;
    let space_root = inst.space().root();
    let mut mt = Mtbdd::default();
    let init = m.initial(space_root);
    let mut root = mt.intern(MNode::Leaf(init));
    for (p, node) in inst.decomposition().nodes().iter().enumerate() {
        if let NiceKind::Forget(_) = node.kind {
            let vars = inst.context_positions(p);
            let mut expansions: HashMap<u32, u32> = HashMap::new();
            let mut memo = HashMap::new();
            root = mt.substitute(root, &mut memo, &mut |mt, s| {
                if let Some(&t) = expansions.get(&s) {
                    return t;
                }
                let t = mt.tree(vars, &mut Vec::with_capacity(vars.len()), &mut |bits| {
                    inst.forget(m, p, s, bits)
                });
                expansions.insert(s, t);
                t
            });
        }
    }
    let mut b = ObddBuilder::new();
    let mut map = vec![0u32; mt.nodes.len()];
    for (x, n) in mt.nodes.iter().enumerate() {
        map[x] = match *n {
            MNode::Leaf(s) => u32::from(m.accepting(space_root, s)),
            MNode::Decision { var, lo, hi } => b.mk(var, map[lo as usize], map[hi as usize]),
        };
    }
    let obdd = b.finish(map[root as usize], order, inst.legend().clone());
    Ok(ObddCompilation {
        obdd,
        reachable_states: reach.size(),
        n: inst.n(),
        width: inst.width(),
        k: inst.k(),
        formula_size: inst.formula_size(),
    })
}

/// Compile `phi` on `g` along the nice path decomposition `t`.
pub fn compile_obdd(
    phi: &Formula,
    g: &Graph,
    t: &NiceTreeDecomposition,
    c: &Coloring,
) -> Result<ObddCompilation, ObddError> {
    if let Some(p) = t.nodes().iter().position(|n| n.kind == NiceKind::Join) {
        return Err(ObddError::NotAPath(p));
    }
    let inst = Instance::with_coloring(phi, g, t.clone(), c.clone())?;
    let mut m = inst.machine();
    let reach = inst.reachable(&mut m);
    compile_obdd_instance(&inst, &mut m, &reach)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{good_coloring, id_order_path_decomposition, make_nice};
    use crate::graph::{clique, path, star};
    use crate::mso::parse_formula;
    use crate::query::{kappa_formula, model_count, oracle_function, oracle_models};

    fn compile(phi: &Formula, g: &Graph) -> ObddCompilation {
        let t = make_nice(g, &id_order_path_decomposition(g).unwrap()).unwrap();
        let c = good_coloring(g, &t).unwrap();
        compile_obdd(phi, g, &t, &c).unwrap()
    }

    #[test]
    fn equality_on_single_vertex() {
        let g = clique(1).unwrap();
        let f = parse_formula("free vertex x; free vertex y; (x = y)").unwrap();
        let c = compile(&f, &g);
        let d = &c.obdd;
        assert_eq!(d.legend().len(), 2);
        for a in 0..4u32 {
            assert_eq!(d.evaluate(&[a & 1 == 1, a & 2 == 2]), a == 3);
        }
        assert!(c.within_bound() && c.within_level_bound());
    }

    #[test]
    fn vertex_cover_on_paths() {
        for g in [path(3).unwrap(), star(3).unwrap()] {
            let k = kappa_formula();
            let c = compile(&k, &g);
            let models = oracle_models(&k, &g, 20).unwrap();
            assert_eq!(model_count(&c.obdd), BigUint::from(models.len()));
            assert!(c.obdd.is_ordered() && c.obdd.is_reduced());
            let legend = c.obdd.legend().clone();
            let n = legend.len();
            for a in 0..1u32 << n {
                let bits: Vec<bool> = (0..n).map(|i| a >> i & 1 == 1).collect();
                assert_eq!(c.obdd.evaluate(&bits), oracle_function(&k, &g, &legend, &bits).unwrap());
            }
        }
    }

    #[test]
    fn constant_formula_is_one_terminal() {
        let g = path(2).unwrap();
        let f = parse_formula("exists vertex v. (v = v)").unwrap();
        let c = compile(&f, &g);
        assert_eq!(c.size(), 1);
        assert_eq!(c.obdd.as_constant(), Some(true));
    }

    #[test]
    fn join_is_rejected() {
        let g = star(4).unwrap();
        let td = crate::decomp::TreeDecomposition::from_bags(
            &[&[1, 2], &[1, 3], &[1, 4], &[1, 5]],
            &[(0, 1), (0, 2), (0, 3)],
        );
        let t = make_nice(&g, &td).unwrap();
        let c = good_coloring(&g, &t).unwrap();
        assert!(matches!(compile_obdd(&kappa_formula(), &g, &t, &c), Err(ObddError::NotAPath(_))));
    }
}
