mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::{all_bits, brute_force_vertex_cover};
use mso2dd::assignment::Legend;
use mso2dd::decomp::{
    check_nice, good_coloring, id_order_path_decomposition, make_nice, min_fill_decomposition,
};
use mso2dd::graph::Graph;
use mso2dd::io::AnyDiagram;
use mso2dd::mso::{desugar, parse_formula, Formula};
use mso2dd::obdd::{obdd_apply, BoolOp, Obdd};
use mso2dd::pipeline::{compile, first_mismatch, Target};
use mso2dd::query::{
    all_assignments, enumerate_models, kappa_formula, min_cardinality_model, model_count, oracle_function,
    oracle_models, variables_of, Diagram,
};
use mso2dd::sdd::compile_sdd_instance;
use mso2dd::state::Instance;

/// Shape of a random formula over `free vertex x; free vset X; free edge p`.
#[derive(Debug, Clone)]
enum Shape {
    Atom(u8, u8),
    Not(Box<Shape>),
    Bin(u8, Box<Shape>, Box<Shape>),
    Exists(Box<Shape>),
    Forall(Box<Shape>),
}

fn shape() -> impl Strategy<Value = Shape> {
    let leaf = (0u8..5, any::<u8>()).prop_map(|(k, v)| Shape::Atom(k, v));
    leaf.prop_recursive(4, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Shape::Not(Box::new(a))),
            (0u8..3, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Shape::Bin(op, Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Shape::Exists(Box::new(a))),
            inner.prop_map(|a| Shape::Forall(Box::new(a))),
        ]
    })
}

fn render(s: &Shape, bound: &mut Vec<String>, fresh: &mut usize) -> String {
    match s {
        Shape::Atom(kind, pick) => {
            let v = if bound.is_empty() { "x".to_string() } else { bound[*pick as usize % bound.len()].clone() };
            match kind {
                0 => format!("({v} in X)"),
                1 => format!("adj({v}, p)"),
                2 => format!("({v} = x)"),
                3 => format!("nbr({v}, x)"),
                _ => format!("edge(p, {v}, x)"),
            }
        }
        Shape::Not(a) => format!("~{}", render(a, bound, fresh)),
        Shape::Bin(op, a, b) => {
            let op = ["&", "|", "->"][*op as usize];
            format!("({} {op} {})", render(a, bound, fresh), render(b, bound, fresh))
        }
        Shape::Exists(a) | Shape::Forall(a) => {
            let name = format!("y{fresh}");
            *fresh += 1;
            bound.push(name.clone());
            let body = render(a, bound, fresh);
            bound.pop();
            if matches!(s, Shape::Exists(_)) {
                format!("exists vertex {name}. (({name} in X) & {body})")
            } else {
                format!("forall vertex {name}. (adj({name}, p) -> {body})")
            }
        }
    }
}

fn formula_of(s: &Shape) -> Formula {
    let body = render(s, &mut Vec::new(), &mut 0);
    let src = format!("free vertex x; free vset X; free edge p; (((x in X) | adj(x, p)) & {body})");
    parse_formula(&src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn graph(max_vertices: usize) -> impl Strategy<Value = Graph> {
    (1..=max_vertices).prop_flat_map(|n| {
        let pairs: Vec<(u32, u32)> =
            (1..=n as u32).flat_map(|u| (u + 1..=n as u32).map(move |v| (u, v))).collect();
        let m = pairs.len();
        proptest::collection::vec(any::<bool>(), m).prop_map(move |keep| {
            let edges: Vec<(u32, u32)> = pairs.iter().zip(&keep).filter(|p| *p.1).map(|p| *p.0).collect();
            Graph::new(n, &edges).unwrap()
        })
    })
}

/// Graphs small enough for `formula_of` instances to stay exhaustively
/// checkable: at most 3 vertices and 3 edges.
fn small_graph() -> impl Strategy<Value = Graph> {
    graph(3)
}

fn instance(phi: &Formula, g: &Graph) -> Instance {
    let t = make_nice(g, &min_fill_decomposition(g).unwrap()).unwrap();
    let c = good_coloring(g, &t).unwrap();
    Instance::with_coloring(phi, g, t, c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn desugaring_is_idempotent_and_core(s in shape()) {
        let f = formula_of(&s);
        let once = desugar(&f);
        prop_assert!(once.is_core());
        prop_assert_eq!(desugar(&once), once.clone());
        prop_assert_eq!(once.free_ids(), f.free_ids());
    }

    #[test]
    fn desugaring_preserves_meaning(s in shape(), g in small_graph()) {
        let f = formula_of(&s);
        let d = desugar(&f);
        for alpha in all_assignments(&f, &g) {
            prop_assert_eq!(
                mso2dd::query::oracle_eval(&f, &g, &alpha).unwrap(),
                mso2dd::query::oracle_eval(&d, &g, &alpha).unwrap()
            );
        }
    }

    #[test]
    fn encode_decode_round_trip(s in shape(), g in small_graph()) {
        let f = formula_of(&s);
        let legend = Legend::new(&f, &g);
        for alpha in all_assignments(&f, &g) {
            let bits = legend.encode_bits(&alpha).unwrap();
            prop_assert!(legend.is_consistent_bits(&bits));
            prop_assert_eq!(legend.decode_bits(&bits).unwrap(), alpha);
        }
        let consistent = all_bits(legend.decision_count()).filter(|b| legend.is_consistent_bits(b)).count();
        prop_assert_eq!(consistent, all_assignments(&f, &g).len());
    }

    #[test]
    fn nice_decompositions_are_well_formed(g in graph(9), path in any::<bool>()) {
        let raw = if path { id_order_path_decomposition(&g) } else { min_fill_decomposition(&g) }.unwrap();
        let t = make_nice(&g, &raw).unwrap();
        prop_assert!(check_nice(&g, &t).is_empty());
        prop_assert_eq!(t.width(), raw.width());
        prop_assert!(t.len() <= 4 * g.n_vertices());
        let c = good_coloring(&g, &t).unwrap();
        for node in t.nodes() {
            let colors: BTreeSet<u32> = node.label.iter().map(|&v| c.color(v)).collect();
            prop_assert_eq!(colors.len(), node.label.len());
            prop_assert!(colors.iter().all(|&x| x >= 1 && x as usize <= t.width() + 1));
        }
    }

    #[test]
    fn state_procedure_matches_oracle(s in shape(), g in small_graph()) {
        let f = formula_of(&s);
        let inst = instance(&f, &g);
        let legend = inst.legend().clone();
        let mut m = inst.machine();
        for bits in all_bits(legend.decision_count()) {
            let mut full = bits.clone();
            full.resize(legend.len(), false);
            if legend.is_consistent_bits(&bits) {
                prop_assert_eq!(
                    inst.accepts_bits(&mut m, &full),
                    oracle_function(&f, &g, &legend, &bits).unwrap()
                );
            }
        }
    }

    #[test]
    fn diagrams_match_oracle(s in shape(), g in small_graph()) {
        let f = formula_of(&s);
        for target in [Target::Sdd, Target::Obdd] {
            let c = compile(&f, &g, None, target).unwrap();
            prop_assert_eq!(first_mismatch(&f, &g, &c.diagram, 14).unwrap(), None);
            prop_assert!(c.stats.within_bound());
            prop_assert_ne!(c.stats.within_level_bound(), Some(false));
            let models = oracle_models(&f, &g, 14).unwrap();
            prop_assert_eq!(model_count(&c.diagram), models.models.len().into());
            let listed: BTreeSet<Vec<bool>> = enumerate_models(&c.diagram, usize::MAX).into_iter().map(|m| m.0).collect();
            prop_assert_eq!(listed, models.models);
        }
    }

    #[test]
    fn sdd_ignores_dummy_values(s in shape(), g in small_graph(), flips in any::<u64>()) {
        let f = formula_of(&s);
        let AnyDiagram::Sdd(d) = compile(&f, &g, None, Target::Sdd).unwrap().diagram else { unreachable!() };
        let n = d.legend.decision_count();
        for bits in all_bits(n) {
            let mut low = bits.clone();
            low.resize(d.legend.len(), false);
            let mut mixed = low.clone();
            for (i, b) in mixed.iter_mut().enumerate().skip(n) {
                *b = flips >> (i % 64) & 1 == 1;
            }
            prop_assert_eq!(d.evaluate(&low), d.evaluate(&mixed));
        }
    }

    #[test]
    fn state_mappings_select_the_reached_state(s in shape(), g in small_graph()) {
        let f = formula_of(&s);
        let inst = instance(&f, &g);
        let mut m = inst.machine();
        let reach = inst.reachable(&mut m);
        let c = compile_sdd_instance(&inst, &mut m, &reach);
        let n = inst.legend().decision_count();
        for bits in all_bits(n) {
            let mut full = bits.clone();
            full.resize(c.sdd.legend.len(), false);
            let states = inst.node_states(&mut m, &full);
            for (p, map) in c.mappings.iter().enumerate() {
                prop_assert!(reach.per_node[p].contains(&states[p]));
                for &(state, image) in &map.images {
                    prop_assert_eq!(c.sdd.eval_node(image, &full), state == states[p], "node {}", p);
                }
            }
        }
    }

    #[test]
    fn min_cardinality_matches_brute_force(g in graph(6)) {
        let k = kappa_formula();
        for target in [Target::Sdd, Target::Obdd] {
            let c = compile(&k, &g, None, target).unwrap();
            let legend = c.diagram.legend().clone();
            let targets = variables_of(&legend, &["XV".to_string()]).unwrap();
            let zero = variables_of(&legend, &["XE".to_string()]).unwrap();
            let best = min_cardinality_model(&c.diagram, &targets, &zero).unwrap();
            prop_assert_eq!(best.cardinality, brute_force_vertex_cover(&g));
            prop_assert!(oracle_function(&k, &g, &legend, &best.bits).unwrap());
        }
    }
}

fn clause_obdd(clauses: &[Vec<usize>], order: &[usize], legend: &Legend) -> Obdd {
    let mut acc = Obdd::constant(true, order.to_vec(), legend.clone());
    for c in clauses {
        let cl = Obdd::clause(c, order.to_vec(), legend.clone());
        acc = obdd_apply(&acc, &cl, BoolOp::And).unwrap();
    }
    acc
}

fn clauses() -> impl Strategy<Value = Vec<Vec<usize>>> {
    proptest::collection::vec(proptest::collection::vec(0usize..5, 1..4), 0..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn obdd_apply_is_pointwise(a in clauses(), b in clauses(), order in Just((0..5).collect::<Vec<usize>>()).prop_shuffle()) {
        let legend = Legend::new(&parse_formula("free vset X; exists vertex v. (v in X)").unwrap(), &Graph::empty(5));
        let (da, db) = (clause_obdd(&a, &order, &legend), clause_obdd(&b, &order, &legend));
        for op in [BoolOp::And, BoolOp::Or, BoolOp::Xor, BoolOp::Implies] {
            let r = obdd_apply(&da, &db, op).unwrap();
            prop_assert!(r.is_ordered() && r.is_reduced());
            prop_assert_eq!(r.reduce(), r.clone());
            for bits in all_bits(5) {
                prop_assert_eq!(r.evaluate(&bits), op.apply(da.evaluate(&bits), db.evaluate(&bits)));
            }
        }
        let n = da.negate();
        for bits in all_bits(5) {
            prop_assert_eq!(n.evaluate(&bits), !da.evaluate(&bits));
        }
    }
}
