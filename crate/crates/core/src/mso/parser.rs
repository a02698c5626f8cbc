use std::collections::HashMap;

use super::{Expr, Formula, MsoError, MsoVariable, Sort, VarId};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    EqSign,
    NotEq,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, MsoError> {
    let mut out = Vec::new();
    for (li, line_text) in text.lines().enumerate() {
        let line = li + 1;
        let chars: Vec<char> = line_text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let single = match c {
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ',' => Some(Tok::Comma),
                ';' => Some(Tok::Semi),
                '.' => Some(Tok::Dot),
                '~' => Some(Tok::Tilde),
                '&' => Some(Tok::Amp),
                '|' => Some(Tok::Pipe),
                '=' => Some(Tok::EqSign),
                _ => None,
            };
            if let Some(tok) = single {
                out.push(Token { tok, line, col });
                i += 1;
            } else if c == '#' {
                break;
            } else if c.is_whitespace() {
                i += 1;
            } else if c == '-' && chars.get(i + 1) == Some(&'>') {
                out.push(Token { tok: Tok::Arrow, line, col });
                i += 2;
            } else if c == '!' && chars.get(i + 1) == Some(&'=') {
                out.push(Token { tok: Tok::NotEq, line, col });
                i += 2;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                out.push(Token { tok: Tok::Ident(word), line, col });
            } else {
                return Err(MsoError::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "free", "vertex", "edge", "vset", "eset", "exists", "forall", "adj", "nbr", "in", "notin",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: Vec<MsoVariable>,
    free: Vec<VarId>,
    free_names: HashMap<String, VarId>,
    scope: Vec<(String, VarId)>,
}

/// Parse `.mso` text into a sort-checked syntax tree. Every quantifier gets a
/// fresh variable, renamed with a numeric suffix if its name is taken.
pub fn parse_formula(text: &str) -> Result<Formula, MsoError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars: Vec::new(),
        free: Vec::new(),
        free_names: HashMap::new(),
        scope: Vec::new(),
    };
    while p.peek_word() == Some("free") {
        p.declaration()?;
    }
    let body = p.expr()?;
    if let Some(t) = p.toks.get(p.pos) {
        return Err(MsoError::Syntax {
            line: t.line,
            col: t.col,
            msg: "trailing input after formula".into(),
        });
    }
    Ok(Formula::from_parts(p.vars, p.free, body))
}

impl Parser {
    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        }
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, MsoError> {
        let (line, col) = self.here();
        Err(MsoError::Syntax { line, col, msg: msg.into() })
    }

    fn peek(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn peek_word(&self) -> Option<&str> {
        match self.peek(0) {
            Some(Tok::Ident(w)) => Some(w),
            _ => None,
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), MsoError> {
        if self.peek(0) == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.syntax(format!("expected {what}"))
        }
    }

    fn name(&mut self) -> Result<(String, usize, usize), MsoError> {
        let (line, col) = self.here();
        match self.peek(0) {
            Some(Tok::Ident(w)) if !KEYWORDS.contains(&w.as_str()) => {
                let w = w.clone();
                self.pos += 1;
                Ok((w, line, col))
            }
            _ => self.syntax("expected a variable name"),
        }
    }

    fn sort(&mut self) -> Result<Sort, MsoError> {
        match self.peek_word().and_then(Sort::from_keyword) {
            Some(s) => {
                self.pos += 1;
                Ok(s)
            }
            None => self.syntax("expected a sort (vertex, edge, vset, eset)"),
        }
    }

    fn declaration(&mut self) -> Result<(), MsoError> {
        self.pos += 1;
        let sort = self.sort()?;
        let (name, line, col) = self.name()?;
        if self.free_names.contains_key(&name) {
            return Err(MsoError::DuplicateFree { line, col, name });
        }
        let id = VarId(self.vars.len() as u32);
        self.vars.push(MsoVariable { name: name.clone(), sort });
        self.free.push(id);
        self.free_names.insert(name, id);
        self.expect(Tok::Semi, "`;` after declaration")
    }

    fn lookup(&mut self) -> Result<(VarId, usize, usize), MsoError> {
        let (name, line, col) = self.name()?;
        let found = self
            .scope
            .iter()
            .rev()
            .find(|(n, _)| *n == name)
            .map(|&(_, id)| id)
            .or_else(|| self.free_names.get(&name).copied());
        match found {
            Some(id) => Ok((id, line, col)),
            None => Err(MsoError::Unbound { line, col, name }),
        }
    }

    fn sort_of(&self, id: VarId) -> Sort {
        self.vars[id.index()].sort
    }

    fn require(&self, id: VarId, want: Sort, line: usize, col: usize, ctx: &str) -> Result<(), MsoError> {
        let got = self.sort_of(id);
        if got == want {
            Ok(())
        } else {
            Err(MsoError::Sort {
                line,
                col,
                msg: format!(
                    "{ctx}: `{}` has sort {}, expected {}",
                    self.vars[id.index()].name,
                    got.keyword(),
                    want.keyword()
                ),
            })
        }
    }

    fn fresh_name(&self, base: &str) -> String {
        let taken = |n: &str| self.vars.iter().any(|v| v.name == n);
        if !taken(base) {
            return base.to_string();
        }
        (1..)
            .map(|k| format!("{base}_{k}"))
            .find(|n| !taken(n))
            .unwrap()
    }

    fn expr(&mut self) -> Result<Expr, MsoError> {
        match self.peek(0).cloned() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(Expr::not(self.expr()?))
            }
            Some(Tok::LParen) => {
                let is_atom = matches!(self.peek(1), Some(Tok::Ident(w)) if !KEYWORDS.contains(&w.as_str()))
                    && match self.peek(2) {
                        Some(Tok::EqSign) | Some(Tok::NotEq) => true,
                        Some(Tok::Ident(w)) => w == "in" || w == "notin",
                        _ => false,
                    };
                if is_atom {
                    self.comparison()
                } else {
                    self.pos += 1;
                    let a = self.expr()?;
                    if self.peek(0) == Some(&Tok::RParen) {
                        self.pos += 1;
                        return Ok(a);
                    }
                    let op = self.peek(0).cloned();
                    self.pos += 1;
                    let b = self.expr()?;
                    self.expect(Tok::RParen, "`)` closing a binary formula")?;
                    let (a, b) = (Box::new(a), Box::new(b));
                    match op {
                        Some(Tok::Amp) => Ok(Expr::And(a, b)),
                        Some(Tok::Pipe) => Ok(Expr::Or(a, b)),
                        Some(Tok::Arrow) => Ok(Expr::Implies(a, b)),
                        _ => {
                            self.pos -= 1;
                            self.syntax("expected `&`, `|` or `->`")
                        }
                    }
                }
            }
            Some(Tok::Ident(w)) => match w.as_str() {
                "exists" | "forall" => self.quantifier(w == "exists"),
                "adj" | "edge" | "nbr" if self.peek(1) == Some(&Tok::LParen) => self.predicate(&w),
                _ => self.syntax(format!("unexpected `{w}`")),
            },
            _ => self.syntax("expected a formula"),
        }
    }

    fn quantifier(&mut self, exists: bool) -> Result<Expr, MsoError> {
        self.pos += 1;
        let sort = self.sort()?;
        let (name, line, col) = self.name()?;
        if self.free_names.contains_key(&name) {
            return Err(MsoError::RebindFree { line, col, name });
        }
        self.expect(Tok::Dot, "`.` after the quantified variable")?;
        let id = VarId(self.vars.len() as u32);
        let unique = self.fresh_name(&name);
        self.vars.push(MsoVariable { name: unique, sort });
        self.scope.push((name.clone(), id));
        let body = self.expr()?;
        self.scope.pop();
        if !body.free_vars().contains(&id) {
            return Err(MsoError::UnusedBinder { line, col, name });
        }
        let body = Box::new(body);
        Ok(if exists {
            Expr::Exists(vec![id], body)
        } else {
            Expr::Forall(vec![id], body)
        })
    }

    fn predicate(&mut self, which: &str) -> Result<Expr, MsoError> {
        self.pos += 2;
        let arity = if which == "edge" { 3 } else { 2 };
        let mut args = Vec::new();
        for i in 0..arity {
            if i > 0 {
                self.expect(Tok::Comma, "`,`")?;
            }
            args.push(self.lookup()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        match which {
            "adj" => {
                let ((x, l1, c1), (e, l2, c2)) = (args[0], args[1]);
                self.require(x, Sort::Vertex, l1, c1, "adj")?;
                self.require(e, Sort::Edge, l2, c2, "adj")?;
                Ok(Expr::Adj(x, e))
            }
            "edge" => {
                let (e, l, c) = args[0];
                self.require(e, Sort::Edge, l, c, "edge")?;
                for &(v, l, c) in &args[1..] {
                    self.require(v, Sort::Vertex, l, c, "edge")?;
                }
                Ok(Expr::EdgeRel(e, args[1].0, args[2].0))
            }
            _ => {
                for &(v, l, c) in &args {
                    self.require(v, Sort::Vertex, l, c, "nbr")?;
                }
                Ok(Expr::Nbr(args[0].0, args[1].0))
            }
        }
    }

    fn comparison(&mut self) -> Result<Expr, MsoError> {
        self.pos += 1;
        let (a, la, ca) = self.lookup()?;
        let op = self.peek(0).cloned();
        self.pos += 1;
        let (b, lb, cb) = self.lookup()?;
        self.expect(Tok::RParen, "`)`")?;
        let sa = self.sort_of(a);
        match op {
            Some(Tok::EqSign) | Some(Tok::NotEq) => {
                if !sa.is_object() {
                    return Err(MsoError::Sort {
                        line: la,
                        col: ca,
                        msg: "equality compares vertex or edge variables".into(),
                    });
                }
                self.require(b, sa, lb, cb, "equality")?;
                Ok(if op == Some(Tok::EqSign) { Expr::Eq(a, b) } else { Expr::Neq(a, b) })
            }
            _ => {
                let want = match sa {
                    Sort::Vertex => Sort::VertexSet,
                    Sort::Edge => Sort::EdgeSet,
                    _ => {
                        return Err(MsoError::Sort {
                            line: la,
                            col: ca,
                            msg: "membership needs a vertex or edge on the left".into(),
                        })
                    }
                };
                self.require(b, want, lb, cb, "membership")?;
                let negated = matches!(op, Some(Tok::Ident(ref w)) if w == "notin");
                Ok(if negated { Expr::NotIn(a, b) } else { Expr::In(a, b) })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality() {
        let f = parse_formula("free vertex x; free vertex y; (x = y)").unwrap();
        assert_eq!(f.body(), &Expr::Eq(VarId(0), VarId(1)));
    }

    #[test]
    fn grouping_parentheses() {
        let f = parse_formula("free vertex x; free vertex y; ((~(x = y)))").unwrap();
        assert_eq!(f.body(), &Expr::not(Expr::Eq(VarId(0), VarId(1))));
        let f = parse_formula("free vset X; ~(exists vertex v. (v in X))").unwrap();
        assert!(matches!(f.body(), Expr::Not(inner) if matches!(inner.as_ref(), Expr::Exists(..))));
        assert!(parse_formula("free vertex x; ((x = x)").is_err());
    }

    #[test]
    fn forall_stays_sugar() {
        let f = parse_formula("free vset X; forall vertex v. (v in X)").unwrap();
        assert_eq!(f.body(), &Expr::Forall(vec![VarId(1)], Box::new(Expr::In(VarId(1), VarId(0)))));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_formula("free vertex x; free edge e; adj(e, x)"),
            Err(MsoError::Sort { .. })
        ));
        assert!(matches!(
            parse_formula("free vertex x; free vertex y; adj(x, y)"),
            Err(MsoError::Sort { .. })
        ));
        assert!(matches!(parse_formula("free vertex x; (x = y)"), Err(MsoError::Unbound { .. })));
        assert!(matches!(
            parse_formula("free vertex x; exists vertex x. (x = x)"),
            Err(MsoError::RebindFree { .. })
        ));
        assert!(matches!(
            parse_formula("free vertex x; free edge x; (x = x)"),
            Err(MsoError::DuplicateFree { .. })
        ));
        assert!(matches!(
            parse_formula("free vertex x; exists vertex y. (x = x)"),
            Err(MsoError::UnusedBinder { .. })
        ));
        assert!(matches!(parse_formula("free vertex x; (x = x"), Err(MsoError::Syntax { .. })));
        assert!(matches!(parse_formula("free vertex x; (x = x) &"), Err(MsoError::Syntax { .. })));
        assert!(matches!(parse_formula("free vertex x; ((x = x) ^ (x = x))"), Err(MsoError::Syntax { .. })));
        assert!(matches!(
            parse_formula("free vertex x; free vset X; (X in x)"),
            Err(MsoError::Sort { .. })
        ));
        assert!(matches!(
            parse_formula("free vertex x; free eset X; (x in X)"),
            Err(MsoError::Sort { .. })
        ));
    }

    #[test]
    fn binders_are_renamed_apart() {
        let f = parse_formula(
            "exists vertex v. ((v = v) & exists vertex v. (v = v))",
        )
        .unwrap();
        let names: Vec<_> = f.vars().iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["v", "v_1"]);
        let Expr::Exists(_, body) = f.body() else { panic!() };
        let Expr::And(left, right) = body.as_ref() else { panic!() };
        assert_eq!(left.as_ref(), &Expr::Eq(VarId(0), VarId(0)));
        assert_eq!(right.as_ref(), &Expr::Exists(vec![VarId(1)], Box::new(Expr::Eq(VarId(1), VarId(1)))));
    }

    #[test]
    fn all_connectives_and_comments() {
        let src = "# vertex cover\nfree vset XV; free eset XE;\n\
                   forall edge e. forall vertex u. forall vertex v.\n\
                   ((((u != v) & adj(u, e)) & adj(v, e)) -> (((u in XV) | (v in XV)) | (e in XE)))";
        let f = parse_formula(src).unwrap();
        assert_eq!(f.free_ids().len(), 2);
        assert!(parse_formula("free vertex u; free vertex v; free edge e; (edge(e, u, v) | ~nbr(u, v))").is_ok());
        assert!(parse_formula("free edge e; free eset X; (e notin X)").is_ok());
    }
}
