use super::{Expr, Formula, MsoVariable, Sort, VarId};

/// Rewrite to the core connectives and merge directly nested quantifiers
/// into blocks. Applying it twice changes nothing.
pub fn desugar(f: &Formula) -> Formula {
    let mut vars = f.vars().to_vec();
    let body = core(f.body(), &mut vars);
    Formula::from_parts(vars, f.free_ids().to_vec(), body)
}

fn exists(mut block: Vec<VarId>, body: Expr) -> Expr {
    match body {
        Expr::Exists(inner, b) => {
            block.extend(inner);
            Expr::Exists(block, b)
        }
        other => Expr::Exists(block, Box::new(other)),
    }
}

fn fresh(vars: &mut Vec<MsoVariable>, base: &str, sort: Sort) -> VarId {
    let taken = |n: &str, vars: &[MsoVariable]| vars.iter().any(|v| v.name == n);
    let name = if taken(base, vars) {
        (1..)
            .map(|k| format!("{base}_{k}"))
            .find(|n| !taken(n, vars))
            .unwrap()
    } else {
        base.to_string()
    };
    vars.push(MsoVariable { name, sort });
    VarId(vars.len() as u32 - 1)
}

fn core(e: &Expr, vars: &mut Vec<MsoVariable>) -> Expr {
    match e {
        Expr::Adj(..) | Expr::Eq(..) | Expr::In(..) => e.clone(),
        Expr::Not(a) => Expr::not(core(a, vars)),
        Expr::And(a, b) => Expr::and(core(a, vars), core(b, vars)),
        Expr::Exists(vs, a) => exists(vs.clone(), core(a, vars)),
        Expr::Or(a, b) => Expr::not(Expr::and(Expr::not(core(a, vars)), Expr::not(core(b, vars)))),
        Expr::Implies(a, b) => Expr::not(Expr::and(core(a, vars), Expr::not(core(b, vars)))),
        Expr::Forall(vs, a) => {
            let mut block = vs.clone();
            let mut body = a.as_ref();
            while let Expr::Forall(more, inner) = body {
                block.extend(more);
                body = inner;
            }
            Expr::not(exists(block, Expr::not(core(body, vars))))
        }
        Expr::Neq(a, b) => Expr::not(Expr::Eq(*a, *b)),
        Expr::NotIn(a, b) => Expr::not(Expr::In(*a, *b)),
        Expr::EdgeRel(e, u, v) => Expr::and(
            Expr::and(Expr::not(Expr::Eq(*u, *v)), Expr::Adj(*u, *e)),
            Expr::Adj(*v, *e),
        ),
        Expr::Nbr(u, v) => {
            let x = fresh(vars, "nbr_edge", Sort::Edge);
            Expr::Exists(vec![x], Box::new(Expr::and(Expr::Adj(*u, x), Expr::Adj(*v, x))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_formula;
    use super::*;

    #[test]
    fn forall_becomes_not_exists_not() {
        let f = desugar(&parse_formula("free vset X; forall vertex v. (v in X)").unwrap());
        let v = VarId(1);
        assert_eq!(
            f.body(),
            &Expr::not(Expr::Exists(vec![v], Box::new(Expr::not(Expr::In(v, VarId(0))))))
        );
    }

    #[test]
    fn forall_chains_merge() {
        let f = desugar(
            &parse_formula("forall vertex u. forall vertex v. ((u = v) | ~(u = v))").unwrap(),
        );
        let Expr::Not(inner) = f.body() else { panic!() };
        assert!(matches!(inner.as_ref(), Expr::Exists(vs, _) if vs.len() == 2));
    }

    #[test]
    fn edge_relation() {
        let f = desugar(
            &parse_formula("free edge e; free vertex u; free vertex v; edge(e, u, v)").unwrap(),
        );
        let (e, u, v) = (VarId(0), VarId(1), VarId(2));
        assert_eq!(
            f.body(),
            &Expr::and(Expr::and(Expr::not(Expr::Eq(u, v)), Expr::Adj(u, e)), Expr::Adj(v, e))
        );
    }

    #[test]
    fn neighbour_relation() {
        let f = desugar(&parse_formula("free vertex u; free vertex v; nbr(u, v)").unwrap());
        let x = VarId(2);
        assert_eq!(f.var(x).sort, Sort::Edge);
        assert_eq!(
            f.body(),
            &Expr::Exists(vec![x], Box::new(Expr::and(Expr::Adj(VarId(0), x), Expr::Adj(VarId(1), x))))
        );
    }

    #[test]
    fn idempotent() {
        let f = desugar(
            &parse_formula(
                "free vset S; forall vertex u. exists vertex v. (((u = v) | nbr(u, v)) & (v in S))",
            )
            .unwrap(),
        );
        assert!(f.is_core());
        assert_eq!(desugar(&f), f);
    }
}
