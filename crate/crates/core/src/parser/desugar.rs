//! Surface syntax to core [`Expr`].

use std::collections::HashSet;
use std::sync::{Arc, OnceLock};

use crate::error::{ParseError, Pos};
use crate::stdlib::{Prim, PRELUDE};
use crate::syntax::{Expr, HandlerExpr, Name};

use super::surface::{Clause, ClauseKey, Definition, Pattern, SurfaceExpr, SurfaceProgram};

/// Desugars a program on its own.
pub fn desugar(program: &SurfaceProgram) -> Result<Expr, ParseError> {
    Desugarer::default().program(&[], program)
}

/// Desugars a program with the prelude definitions in scope.
pub fn desugar_with_prelude(program: &SurfaceProgram) -> Result<Expr, ParseError> {
    Desugarer::default().program(&prelude().definitions, program)
}

fn prelude() -> &'static SurfaceProgram {
    static PARSED: OnceLock<SurfaceProgram> = OnceLock::new();
    PARSED.get_or_init(|| super::parse(PRELUDE).expect("prelude parses"))
}

#[derive(Default)]
struct Desugarer {
    scope: Vec<Name>,
    fresh: usize,
}

impl Desugarer {
    fn fresh(&mut self) -> Name {
        self.fresh += 1;
        // `%` cannot start an identifier, so these never capture user names.
        Arc::from(format!("%{}", self.fresh))
    }

    fn program(
        &mut self,
        prelude: &[Definition],
        program: &SurfaceProgram,
    ) -> Result<Expr, ParseError> {
        let defs: Vec<&Definition> = prelude.iter().chain(&program.definitions).collect();
        let main = match &program.main {
            Some(e) => e.clone(),
            None => {
                let has_main = program
                    .definitions
                    .iter()
                    .any(|d| matches!(&d.pattern, Pattern::Var(n, _) if &**n == "main"));
                if !has_main {
                    return Err(ParseError::new(
                        Pos { line: 1, col: 1 },
                        "program has no result expression and no `main` definition",
                    ));
                }
                SurfaceExpr::Var(Arc::from("main"), Pos::default())
            }
        };
        self.definitions(&defs, &main)
    }

    fn definitions(
        &mut self,
        defs: &[&Definition],
        main: &SurfaceExpr,
    ) -> Result<Expr, ParseError> {
        let Some((first, rest)) = defs.split_first() else {
            return self.expr(main);
        };
        let rhs = self.expr(&first.body)?;
        self.bind(&first.pattern, rhs, first.pos, |d| {
            d.definitions(rest, main)
        })
    }

    /// Binds `pattern` to the value of `rhs` around the body built by `body`.
    fn bind(
        &mut self,
        pattern: &Pattern,
        rhs: Expr,
        pos: Pos,
        body: impl FnOnce(&mut Self) -> Result<Expr, ParseError>,
    ) -> Result<Expr, ParseError> {
        let mut seen = HashSet::new();
        check_linear(pattern, &mut seen, pos)?;
        let mark = self.scope.len();
        let (binder, projections) = self.flatten_pattern(pattern);
        for (name, _) in &projections {
            self.scope.push(name.clone());
        }
        if let Pattern::Var(n, _) = pattern {
            self.scope.push(n.clone());
        }
        let inner = body(self);
        self.scope.truncate(mark);
        let mut inner = inner?;
        // Projections are bound innermost-last, so wrap in reverse.
        for (name, proj) in projections.into_iter().rev() {
            inner = Expr::app(Expr::lam(name, inner), proj);
        }
        Ok(Expr::app(Expr::lam(binder, inner), rhs))
    }

    /// The variable the whole value binds to, plus `(name, projection)`
    /// pairs for every named leaf of a compound pattern in source order.
    fn flatten_pattern(&mut self, pattern: &Pattern) -> (Name, Vec<(Name, Expr)>) {
        match pattern {
            Pattern::Var(n, _) => (n.clone(), Vec::new()),
            Pattern::Wild => (self.fresh(), Vec::new()),
            Pattern::Tuple(_) | Pattern::Table(_) => {
                let whole = self.fresh();
                let mut out = Vec::new();
                self.project(pattern, Expr::Var(whole.clone()), &mut out);
                (whole, out)
            }
        }
    }

    fn project(&mut self, pattern: &Pattern, source: Expr, out: &mut Vec<(Name, Expr)>) {
        match pattern {
            Pattern::Var(n, _) => out.push((n.clone(), source)),
            Pattern::Wild => {}
            Pattern::Tuple(ps) | Pattern::Table(ps) => {
                // Name the intermediate so nested projections share it.
                let tmp = self.fresh();
                out.push((tmp.clone(), source));
                let arity = ps.len();
                for (i, p) in ps.iter().enumerate() {
                    let part = match pattern {
                        Pattern::Tuple(_) if arity == 2 => Expr::app(
                            Expr::Builtin(if i == 0 { Prim::Fst } else { Prim::Snd }),
                            Expr::Var(tmp.clone()),
                        ),
                        Pattern::Tuple(_) => Expr::app(
                            Expr::Builtin(Prim::Proj {
                                index: i as u32,
                                arity: arity as u32,
                            }),
                            Expr::Var(tmp.clone()),
                        ),
                        _ => Expr::app(Expr::Var(tmp.clone()), Expr::int(i as i64)),
                    };
                    self.project(p, part, out);
                }
            }
        }
    }

    fn with_binder<T>(
        &mut self,
        binder: &Option<Name>,
        f: impl FnOnce(&mut Self) -> Result<T, ParseError>,
    ) -> Result<(Name, T), ParseError> {
        let name = match binder {
            Some(n) => n.clone(),
            None => self.fresh(),
        };
        self.scope.push(name.clone());
        let r = f(self);
        self.scope.pop();
        Ok((name, r?))
    }

    fn resolve(&self, name: &Name, pos: Pos) -> Result<Expr, ParseError> {
        if self.scope.iter().rev().any(|n| n == name) {
            return Ok(Expr::Var(name.clone()));
        }
        match Prim::from_name(name) {
            Some(p) => Ok(Expr::Builtin(p)),
            None => Err(ParseError::new(pos, format!("unbound variable {name}"))),
        }
    }

    fn expr(&mut self, e: &SurfaceExpr) -> Result<Expr, ParseError> {
        Ok(match e {
            SurfaceExpr::Lit(l) => Expr::Lit(l.clone()),
            SurfaceExpr::Var(n, pos) => self.resolve(n, *pos)?,
            SurfaceExpr::Lam(b, body) => {
                let (name, body) = self.with_binder(b, |d| d.expr(body))?;
                Expr::Lam(name, Arc::new(body))
            }
            SurfaceExpr::App(f, a) => Expr::app(self.expr(f)?, self.expr(a)?),
            SurfaceExpr::Infix(op, pos, a, b) => {
                let op = self.resolve(op, *pos)?;
                Expr::apps(op, [self.expr(a)?, self.expr(b)?])
            }
            SurfaceExpr::For(x, size, body) => {
                let size = self.expr(size)?;
                let (var, body) = self.with_binder(x, |d| d.expr(body))?;
                Expr::For {
                    var,
                    size: Arc::new(size),
                    body: Arc::new(body),
                }
            }
            SurfaceExpr::Handle {
                clauses,
                state,
                body,
                thunk,
                pos,
            } => {
                let handler = Arc::new(self.handler(clauses, *pos)?);
                let state = Arc::new(self.expr(state)?);
                let body = self.expr(body)?;
                if *thunk {
                    // handler h s e  ==>  \_. handle h s (e ())
                    let unused = self.fresh();
                    Expr::lam(
                        unused,
                        Expr::Handle {
                            handler,
                            state,
                            body: Arc::new(Expr::app(body, Expr::unit())),
                        },
                    )
                } else {
                    Expr::Handle {
                        handler,
                        state,
                        body: Arc::new(body),
                    }
                }
            }
            SurfaceExpr::Perform(op) => Expr::Perform(op.clone()),
            SurfaceExpr::Table(es) => Expr::Table(self.exprs(es)?),
            SurfaceExpr::Tuple(es) => Expr::Tuple(self.exprs(es)?),
            SurfaceExpr::If(c, t, f) => Expr::If {
                cond: Arc::new(self.expr(c)?),
                then: Arc::new(self.expr(t)?),
                otherwise: Arc::new(self.expr(f)?),
            },
            SurfaceExpr::Case {
                scrutinee,
                left,
                right,
            } => {
                let scrutinee = Arc::new(self.expr(scrutinee)?);
                let (left_var, l) = self.with_binder(&left.0, |d| d.expr(&left.1))?;
                let (right_var, r) = self.with_binder(&right.0, |d| d.expr(&right.1))?;
                Expr::CaseEither {
                    scrutinee,
                    left_var,
                    left: Arc::new(l),
                    right_var,
                    right: Arc::new(r),
                }
            }
            SurfaceExpr::Bind(p, rhs, rest) => {
                let rhs = self.expr(rhs)?;
                let pos = pattern_pos(p);
                self.bind(p, rhs, pos, |d| d.expr(rest))?
            }
            SurfaceExpr::Seq(a, b) => {
                let a = self.expr(a)?;
                let b = self.expr(b)?;
                Expr::app(Expr::lam(self.fresh(), b), a)
            }
        })
    }

    fn exprs(&mut self, es: &[SurfaceExpr]) -> Result<Arc<[Expr]>, ParseError> {
        es.iter()
            .map(|e| self.expr(e))
            .collect::<Result<Vec<_>, _>>()
            .map(Arc::from)
    }

    fn handler(&mut self, clauses: &[Clause], pos: Pos) -> Result<HandlerExpr, ParseError> {
        let mut on_return = None;
        let mut on_traverse = None;
        let mut op: Option<(Name, Expr)> = None;
        for c in clauses {
            let body = self.expr(&c.body)?;
            let slot_taken = match &c.key {
                ClauseKey::Return => on_return.replace(body).is_some(),
                ClauseKey::Traverse => on_traverse.replace(body).is_some(),
                ClauseKey::Op(name) => {
                    if let Some((existing, _)) = &op {
                        let msg = if existing == name {
                            format!("duplicate clause {name}")
                        } else {
                            format!(
                                "a handler handles exactly one operation, found {existing} and {name}"
                            )
                        };
                        return Err(ParseError::new(c.pos, msg));
                    }
                    op = Some((name.clone(), body));
                    false
                }
            };
            if slot_taken {
                let key = if c.key == ClauseKey::Return {
                    "return"
                } else {
                    "traverse"
                };
                return Err(ParseError::new(c.pos, format!("duplicate clause {key}")));
            }
        }
        let Some((op, on_op)) = op else {
            return Err(ParseError::new(pos, "handler has no operation clause"));
        };
        let on_return = match on_return {
            Some(e) => e,
            None => self.default_return(),
        };
        let on_traverse = match on_traverse {
            Some(e) => e,
            None => self.default_traverse(),
        };
        Ok(HandlerExpr {
            op,
            on_return,
            on_op,
            on_traverse,
        })
    }

    /// `\s.\x. x`
    fn default_return(&mut self) -> Expr {
        let s = self.fresh();
        let x = self.fresh();
        Expr::lam(s, Expr::lam(x.clone(), Expr::Var(x)))
    }

    /// `\n.\s.\l.\k. k s (l (for i:n. s))`
    fn default_traverse(&mut self) -> Expr {
        let [n, s, l, k, i] = [(); 5].map(|_| self.fresh());
        let states = Expr::For {
            var: i,
            size: Arc::new(Expr::Var(n.clone())),
            body: Arc::new(Expr::Var(s.clone())),
        };
        let body = Expr::apps(
            Expr::Var(k.clone()),
            [
                Expr::Var(s.clone()),
                Expr::app(Expr::Var(l.clone()), states),
            ],
        );
        Expr::lam(n, Expr::lam(s, Expr::lam(l, Expr::lam(k, body))))
    }
}

fn check_linear(p: &Pattern, seen: &mut HashSet<Name>, pos: Pos) -> Result<(), ParseError> {
    match p {
        Pattern::Var(n, _) => {
            if !seen.insert(n.clone()) {
                return Err(ParseError::new(
                    pos,
                    format!("duplicate binder {n} in pattern"),
                ));
            }
            Ok(())
        }
        Pattern::Wild => Ok(()),
        Pattern::Tuple(ps) | Pattern::Table(ps) => {
            ps.iter().try_for_each(|q| check_linear(q, seen, pos))
        }
    }
}

fn pattern_pos(p: &Pattern) -> Pos {
    match p {
        Pattern::Var(_, pos) => *pos,
        Pattern::Wild => Pos::default(),
        Pattern::Tuple(ps) | Pattern::Table(ps) => ps
            .iter()
            .map(pattern_pos)
            .find(|p| p.line > 0)
            .unwrap_or_default(),
    }
}
