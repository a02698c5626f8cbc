use std::collections::HashMap;

use num_bigint::BigUint;

use super::{Sdd, SddManager, VTreeBuilder, FALSE, TRUE};
use crate::assignment::{DecisionVariable, DummyKind};
use crate::decomp::{Coloring, NiceKind, NiceTreeDecomposition};
use crate::graph::Graph;
use crate::mso::Formula;
use crate::query::sdd_size_bound;
use crate::state::{Instance, Machine, Reachability, StateError};

/// States paired with the SDDs selecting them, all respecting `vnode`.
/// For every assignment to the scope exactly one image is true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSddMapping {
    pub vnode: usize,
    /// Ascending by state.
    pub images: Vec<(u32, u32)>,
}

impl StateSddMapping {
    pub fn image(&self, state: u32) -> u32 {
        match self.images.binary_search_by_key(&state, |e| e.0) {
            Ok(i) => self.images[i].1,
            Err(_) => FALSE,
        }
    }
}

/// One SDD per assignment to `vars` over a right-linear v-tree; the image
/// of `a` is true only where variable `vars[i]` equals bit `i` of `a`.
pub fn context_assignment_mapping(m: &mut SddManager, b: &mut VTreeBuilder, vars: &[usize]) -> StateSddMapping {
    assert!(!vars.is_empty(), "context has no variables");
    let k = vars.len();
    let mut vn = vec![0usize; k];
    vn[k - 1] = b.leaf(vars[k - 1]);
    for i in (0..k - 1).rev() {
        let l = b.leaf(vars[i]);
        vn[i] = b.internal(l, vn[i + 1]);
    }
    let images = (0..1u32 << k)
        .map(|a| {
            let bit = |i: usize| a >> i & 1 == 1;
            let mut s = m.literal(vars[k - 1], bit(k - 1));
            for i in (0..k - 1).rev() {
                let yes = m.literal(vars[i], bit(i));
                let no = m.literal(vars[i], !bit(i));
                s = m.decomposition(vn[i], &[(yes, s), (no, FALSE)]);
            }
            (a, s)
        })
        .collect();
    StateSddMapping { vnode: vn[0], images }
}

/// Combine two mappings over disjoint scopes through the table `f` into a
/// mapping onto `targets`, over v-tree `(t_A, (t_B, dummy))`.
fn state_table_mapping(
    m: &mut SddManager,
    b: &mut VTreeBuilder,
    ga: &StateSddMapping,
    gb: &StateSddMapping,
    dummy: usize,
    targets: &[u32],
    mut f: impl FnMut(u32, u32) -> u32,
) -> StateSddMapping {
    let x = b.leaf(dummy);
    let right = b.internal(gb.vnode, x);
    let top = b.internal(ga.vnode, right);
    let mut buckets: Vec<HashMap<u32, Vec<usize>>> = vec![HashMap::new(); ga.images.len()];
    for (ia, &(a, _)) in ga.images.iter().enumerate() {
        for (ib, &(s, _)) in gb.images.iter().enumerate() {
            let c = f(a, s);
            debug_assert!(targets.binary_search(&c).is_ok(), "transition leaves the target set");
            buckets[ia].entry(c).or_default().push(ib);
        }
    }
    let mut betas: HashMap<Vec<usize>, u32> = HashMap::new();
    let mut beta = |m: &mut SddManager, set: &[usize]| -> u32 {
        if let Some(&id) = betas.get(set) {
            return id;
        }
        let mut elements = Vec::with_capacity(gb.images.len());
        let mut it = set.iter().peekable();
        for (ib, &(_, g)) in gb.images.iter().enumerate() {
            let hit = it.peek() == Some(&&ib);
            if hit {
                it.next();
            }
            elements.push((g, if hit { TRUE } else { FALSE }));
        }
        let id = m.decomposition(right, &elements);
        betas.insert(set.to_vec(), id);
        id
    };
    let images = targets
        .iter()
        .map(|&c| {
            let elements: Vec<(u32, u32)> = ga
                .images
                .iter()
                .enumerate()
                .map(|(ia, &(_, g))| {
                    let set = buckets[ia].get(&c).map_or(&[][..], |v| v.as_slice());
                    (g, beta(m, set))
                })
                .collect();
            (c, m.decomposition(top, &elements))
        })
        .collect();
    StateSddMapping { vnode: top, images }
}

/// A compiled SDD with the per-node mappings and the figures that enter
/// its size bound.
#[derive(Debug, Clone)]
pub struct SddCompilation {
    pub sdd: Sdd,
    /// Mapping of every decomposition node, indexed by node.
    pub mappings: Vec<StateSddMapping>,
    pub reachable_states: usize,
    pub n: usize,
    pub width: usize,
    pub k: usize,
}

impl SddCompilation {
    pub fn size(&self) -> usize {
        self.sdd.size()
    }

    pub fn bound(&self) -> BigUint {
        sdd_size_bound(self.n, self.k, self.reachable_states)
    }

    pub fn within_bound(&self) -> bool {
        BigUint::from(self.size()) <= self.bound()
    }
}

pub fn compile_sdd_instance(inst: &Instance, m: &mut Machine, reach: &Reachability) -> SddCompilation {
    let td = inst.decomposition();
    let root_space = inst.space().root();
    let mut legend = inst.legend().clone();
    let mut mgr = SddManager::new();
    let mut b = VTreeBuilder::default();
    let mut maps: Vec<StateSddMapping> = Vec::with_capacity(td.len());
    let dummy = |legend: &mut crate::assignment::Legend, kind, node| {
        legend.push_dummy(DecisionVariable::Dummy { kind, node })
    };
    let mut ctx = Vec::new();
    for (p, node) in td.nodes().iter().enumerate() {
        let g = match node.kind {
            NiceKind::Leaf => {
                let d = dummy(&mut legend, DummyKind::Leaf, p);
                let init = m.initial(root_space);
                StateSddMapping { vnode: b.leaf(d), images: vec![(init, TRUE)] }
            }
            NiceKind::Introduce(_) => maps[node.children[0]].clone(),
            NiceKind::Forget(_) => {
                let positions = inst.context_positions(p);
                let gb = if positions.is_empty() {
                    let d = dummy(&mut legend, DummyKind::EmptyContext, p);
                    StateSddMapping { vnode: b.leaf(d), images: vec![(0, TRUE)] }
                } else {
                    context_assignment_mapping(&mut mgr, &mut b, positions)
                };
                let x = dummy(&mut legend, DummyKind::Forget, p);
                let ga = &maps[node.children[0]];
                state_table_mapping(&mut mgr, &mut b, ga, &gb, x, &reach.per_node[p], |s, a| {
                    ctx.clear();
                    ctx.extend((0..positions.len()).map(|i| a >> i & 1 == 1));
                    inst.forget(m, p, s, &ctx)
                })
            }
            NiceKind::Join => {
                let x = dummy(&mut legend, DummyKind::Join, p);
                let (ga, gb) = (&maps[node.children[0]], &maps[node.children[1]]);
                state_table_mapping(&mut mgr, &mut b, ga, gb, x, &reach.per_node[p], |l, r| {
                    inst.join(m, l, r)
                })
            }
        };
        maps.push(g);
    }
    let r = td.root();
    let x = dummy(&mut legend, DummyKind::Root, r);
    let xl = b.leaf(x);
    let top = b.internal(maps[r].vnode, xl);
    let elements: Vec<(u32, u32)> = maps[r]
        .images
        .iter()
        .map(|&(s, g)| (g, if m.accepting(root_space, s) { TRUE } else { FALSE }))
        .collect();
    let root = mgr.decomposition(top, &elements);
    let vtree = b.finish(top, legend.len()).expect("every variable gets one leaf");
    SddCompilation {
        sdd: Sdd { manager: mgr, vtree, legend, root },
        mappings: maps,
        reachable_states: reach.size(),
        n: inst.n(),
        width: inst.width(),
        k: inst.k(),
    }
}

/// Compile `phi` on `g` along the nice decomposition `t` with the good
/// coloring `c`.
pub fn compile_sdd(
    phi: &Formula,
    g: &Graph,
    t: &NiceTreeDecomposition,
    c: &Coloring,
) -> Result<SddCompilation, StateError> {
    let inst = Instance::with_coloring(phi, g, t.clone(), c.clone())?;
    let mut m = inst.machine();
    let reach = inst.reachable(&mut m);
    Ok(compile_sdd_instance(&inst, &mut m, &reach))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::Legend;
    use crate::sdd::SddNode;
    use crate::decomp::{good_coloring, make_nice, min_fill_decomposition};
    use crate::graph::{clique, path};
    use crate::mso::{parse_formula, Sort};
    use crate::query::{kappa_formula, model_count, oracle_function, oracle_models};

    fn compile(src: &Formula, g: &Graph) -> SddCompilation {
        let t = make_nice(g, &min_fill_decomposition(g).unwrap()).unwrap();
        let c = good_coloring(g, &t).unwrap();
        compile_sdd(src, g, &t, &c).unwrap()
    }

    #[test]
    fn context_sdds() {
        let legend = Legend::from_parts(vec![("X".into(), Sort::VertexSet)], 3, 0, Vec::new()).unwrap();
        for k in 1..=3 {
            let mut m = SddManager::new();
            let mut b = VTreeBuilder::default();
            let vars: Vec<usize> = (0..k).collect();
            let g = context_assignment_mapping(&mut m, &mut b, &vars);
            let top = g.vnode;
            let vtree = b.finish(top, k).unwrap();
            let sdd = Sdd { manager: m.clone(), vtree, legend: legend.clone(), root: TRUE };
            for a in 0..1u32 << k {
                let bits: Vec<bool> = (0..3).map(|i| a >> i & 1 == 1).collect();
                for &(d, s) in &g.images {
                    assert_eq!(sdd.eval_node(s, &bits), d == a);
                }
            }
            if k == 1 {
                assert_eq!(m.node(g.image(1)), &SddNode::Literal { var: 0, positive: true });
            }
            if k == 2 {
                let SddNode::Decomposition { elements, .. } = m.node(g.image(1)).clone() else { panic!() };
                let pos = m.literal(0, true);
                let neg = m.literal(0, false);
                let not_d2 = m.literal(1, false);
                let mut expected = vec![(pos, not_d2), (neg, FALSE)];
                expected.sort();
                assert_eq!(elements, expected);
            }
        }
    }

    #[test]
    fn equality_on_single_vertex() {
        let g = clique(1).unwrap();
        let f = parse_formula("free vertex x; free vertex y; (x = y)").unwrap();
        let c = compile(&f, &g);
        let s = &c.sdd;
        let n = s.legend.len();
        for a in 0..4u32 {
            let mut bits = vec![false; n];
            bits[0] = a & 1 == 1;
            bits[1] = a & 2 == 2;
            assert_eq!(s.evaluate(&bits), a == 3);
        }
        assert!(c.within_bound());
    }

    #[test]
    fn vertex_cover_counts() {
        for g in [clique(3).unwrap(), path(3).unwrap()] {
            let k = kappa_formula();
            let c = compile(&k, &g);
            let models = oracle_models(&k, &g, 20).unwrap();
            assert_eq!(model_count(&c.sdd), BigUint::from(models.len()));
            assert!(c.sdd.respects_vtree().is_ok());
            assert!(c.sdd.ignores_dummies());
            assert!(c.sdd.check_partitions(14).is_ok());
            let legend = c.sdd.legend.clone();
            let nd = legend.decision_count();
            for a in 0..1u32 << nd {
                let mut bits = vec![false; legend.len()];
                for (i, b) in bits.iter_mut().enumerate().take(nd) {
                    *b = a >> i & 1 == 1;
                }
                assert_eq!(c.sdd.evaluate(&bits), oracle_function(&k, &g, &legend, &bits[..nd]).unwrap());
            }
        }
    }

    #[test]
    fn closed_tautology_is_constant_true() {
        let g = path(3).unwrap();
        let f = parse_formula("exists vset X. ~(exists vertex v. (~(v in X) & (v in X)))").unwrap();
        let c = compile(&f, &g);
        assert_eq!(model_count(&c.sdd), BigUint::from(1u32));
        assert!(c.sdd.evaluate(&vec![false; c.sdd.legend.len()]));
    }
}
