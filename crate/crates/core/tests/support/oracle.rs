//! Reference evaluator: small-step reduction by substitution, following the
//! textbook rules directly. Slow and independent of the environment machine;
//! used only as a test oracle.

use std::rc::Rc;
use std::sync::atomic::{AtomicUsize, Ordering};

use lambdap::stdlib::Prim as P;
use lambdap::syntax::{HandlerExpr, Literal};
use lambdap::Expr;

#[derive(Debug, Clone, PartialEq)]
pub enum T {
    Int(i64),
    Float(f64),
    Str(Rc<str>),
    Bool(bool),
    Unit,
    Var(Rc<str>),
    Lam(Rc<str>, Rc<T>),
    App(Rc<T>, Rc<T>),
    For(Rc<str>, Rc<T>, Rc<T>),
    Handle(Rc<H>, Rc<T>, Rc<T>),
    Perform(Rc<str>),
    Table(Vec<T>),
    Tuple(Vec<T>),
    If(Rc<T>, Rc<T>, Rc<T>),
    Case(Rc<T>, Rc<str>, Rc<T>, Rc<str>, Rc<T>),
    Prim(P, Vec<T>),
    Left(Rc<T>),
    Right(Rc<T>),
    /// The hole of an evaluation context.
    Hole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct H {
    op: Rc<str>,
    ret: T,
    on_op: T,
    trav: T,
}

enum R {
    Value,
    Step(T),
    /// `E[perform op v]` with no handler for `op` in `E`.
    Op(Rc<str>, T, T),
    /// `E[for x:n. e]` with no handler at all in `E`.
    Loop(Rc<str>, i64, T, T),
}

type Res<A> = Result<A, String>;

pub fn from_expr(e: &Expr) -> T {
    let r = |e: &Expr| Rc::new(from_expr(e));
    let n = |s: &str| Rc::<str>::from(s);
    match e {
        Expr::Lit(l) => match l {
            Literal::Int(i) => T::Int(*i),
            Literal::Float(f) => T::Float(*f),
            Literal::Str(s) => T::Str(n(s)),
            Literal::Bool(b) => T::Bool(*b),
            Literal::Unit => T::Unit,
        },
        Expr::Var(x) => T::Var(n(x)),
        Expr::Lam(x, b) => T::Lam(n(x), r(b)),
        Expr::App(f, a) => T::App(r(f), r(a)),
        Expr::For { var, size, body } => T::For(n(var), r(size), r(body)),
        Expr::Handle {
            handler,
            state,
            body,
        } => T::Handle(Rc::new(from_handler(handler)), r(state), r(body)),
        Expr::Perform(op) => T::Perform(n(op)),
        Expr::Table(es) => T::Table(es.iter().map(from_expr).collect()),
        Expr::Tuple(es) => T::Tuple(es.iter().map(from_expr).collect()),
        Expr::If {
            cond,
            then,
            otherwise,
        } => T::If(r(cond), r(then), r(otherwise)),
        Expr::CaseEither {
            scrutinee,
            left_var,
            left,
            right_var,
            right,
        } => T::Case(r(scrutinee), n(left_var), r(left), n(right_var), r(right)),
        Expr::Builtin(p) => T::Prim(*p, Vec::new()),
    }
}

fn from_handler(h: &HandlerExpr) -> H {
    H {
        op: Rc::from(&*h.op),
        ret: from_expr(&h.on_return),
        on_op: from_expr(&h.on_op),
        trav: from_expr(&h.on_traverse),
    }
}

fn fresh(base: &str) -> Rc<str> {
    static N: AtomicUsize = AtomicUsize::new(0);
    Rc::from(format!("#{base}{}", N.fetch_add(1, Ordering::Relaxed)))
}

fn app(f: T, a: T) -> T {
    T::App(Rc::new(f), Rc::new(a))
}

fn lam(x: &Rc<str>, b: T) -> T {
    T::Lam(x.clone(), Rc::new(b))
}

fn is_value(t: &T) -> bool {
    match t {
        T::Int(_) | T::Float(_) | T::Str(_) | T::Bool(_) | T::Unit => true,
        T::Lam(..) | T::Perform(_) => true,
        T::Prim(p, args) => args.len() < p.arity(),
        T::Table(ts) | T::Tuple(ts) => ts.iter().all(is_value),
        T::Left(v) | T::Right(v) => is_value(v),
        _ => false,
    }
}

/// `t[x := v]` for closed `v`.
fn subst(t: &T, x: &str, v: &T) -> T {
    let s = |t: &T| Rc::new(subst(t, x, v));
    match t {
        T::Var(y) if &**y == x => v.clone(),
        T::Lam(y, b) if &**y != x => T::Lam(y.clone(), s(b)),
        T::App(f, a) => T::App(s(f), s(a)),
        T::For(y, n, b) => T::For(y.clone(), s(n), if &**y == x { b.clone() } else { s(b) }),
        T::Handle(h, st, b) => T::Handle(
            Rc::new(H {
                op: h.op.clone(),
                ret: subst(&h.ret, x, v),
                on_op: subst(&h.on_op, x, v),
                trav: subst(&h.trav, x, v),
            }),
            s(st),
            s(b),
        ),
        T::Table(ts) => T::Table(ts.iter().map(|t| subst(t, x, v)).collect()),
        T::Tuple(ts) => T::Tuple(ts.iter().map(|t| subst(t, x, v)).collect()),
        T::If(c, a, b) => T::If(s(c), s(a), s(b)),
        T::Case(e, l, lb, r, rb) => T::Case(
            s(e),
            l.clone(),
            if &**l == x { lb.clone() } else { s(lb) },
            r.clone(),
            if &**r == x { rb.clone() } else { s(rb) },
        ),
        T::Prim(p, args) => T::Prim(*p, args.iter().map(|t| subst(t, x, v)).collect()),
        T::Left(a) => T::Left(s(a)),
        T::Right(a) => T::Right(s(a)),
        _ => t.clone(),
    }
}

/// Fills the hole of context `ctx` with `t`.
fn plug(ctx: &T, t: &T) -> T {
    let p = |c: &T| Rc::new(plug(c, t));
    match ctx {
        T::Hole => t.clone(),
        T::App(f, a) => T::App(p(f), p(a)),
        T::Handle(h, s, b) => T::Handle(h.clone(), p(s), p(b)),
        T::Table(ts) => T::Table(ts.iter().map(|c| plug(c, t)).collect()),
        T::Tuple(ts) => T::Tuple(ts.iter().map(|c| plug(c, t)).collect()),
        T::If(c, a, b) => T::If(p(c), a.clone(), b.clone()),
        T::Case(e, l, lb, r, rb) => T::Case(p(e), l.clone(), lb.clone(), r.clone(), rb.clone()),
        T::For(x, n, b) => T::For(x.clone(), p(n), b.clone()),
        _ => ctx.clone(),
    }
}

/// Steps `t`; a request coming out of it is re-wrapped by `wrap`.
fn inside(t: &T, wrap: impl Fn(T) -> T) -> Res<Option<R>> {
    Ok(match step(t)? {
        R::Value => None,
        R::Step(t2) => Some(R::Step(wrap(t2))),
        R::Op(op, v, ctx) => Some(R::Op(op, v, wrap(ctx))),
        R::Loop(x, n, b, ctx) => Some(R::Loop(x, n, b, wrap(ctx))),
    })
}

fn step_seq(ts: &[T], rebuild: impl Fn(Vec<T>) -> T) -> Res<R> {
    for (i, t) in ts.iter().enumerate() {
        let wrap = |c: T| {
            let mut v = ts.to_vec();
            v[i] = c;
            rebuild(v)
        };
        if let Some(r) = inside(t, wrap)? {
            return Ok(r);
        }
    }
    Ok(R::Value)
}

fn step(t: &T) -> Res<R> {
    if is_value(t) {
        return Ok(R::Value);
    }
    match t {
        T::Var(x) => Err(format!("unbound variable {x}")),
        T::App(f, a) => {
            if let Some(r) = inside(f, |c| T::App(Rc::new(c), a.clone()))? {
                return Ok(r);
            }
            if let Some(r) = inside(a, |c| T::App(f.clone(), Rc::new(c)))? {
                return Ok(r);
            }
            apply(f, a)
        }
        T::For(x, n, b) => {
            if let Some(r) = inside(n, |c| T::For(x.clone(), Rc::new(c), b.clone()))? {
                return Ok(r);
            }
            match **n {
                T::Int(k) if k >= 0 => Ok(R::Loop(x.clone(), k, (**b).clone(), T::Hole)),
                _ => Err("for size not a non-negative integer".into()),
            }
        }
        T::Handle(h, s, b) => {
            if let Some(r) = inside(s, |c| T::Handle(h.clone(), Rc::new(c), b.clone()))? {
                return Ok(r);
            }
            let resume = |ctx: &T| {
                let s2 = fresh("s");
                let x = fresh("x");
                let body = plug(ctx, &T::Var(x.clone()));
                lam(
                    &s2,
                    lam(
                        &x,
                        T::Handle(h.clone(), Rc::new(T::Var(s2.clone())), Rc::new(body)),
                    ),
                )
            };
            match step(b)? {
                // (return)
                R::Value => Ok(R::Step(app(
                    app(h.ret.clone(), (**s).clone()),
                    (**b).clone(),
                ))),
                R::Step(b2) => Ok(R::Step(T::Handle(h.clone(), s.clone(), Rc::new(b2)))),
                // (perform)
                R::Op(op, v, ctx) if op == h.op => Ok(R::Step(app(
                    app(app(h.on_op.clone(), (**s).clone()), v),
                    resume(&ctx),
                ))),
                R::Op(op, v, ctx) => {
                    Ok(R::Op(op, v, T::Handle(h.clone(), s.clone(), Rc::new(ctx))))
                }
                // (traverse)
                R::Loop(x, n, e, ctx) => {
                    let ss = fresh("ss");
                    let l = lam(
                        &ss,
                        T::For(
                            x.clone(),
                            Rc::new(T::Int(n)),
                            Rc::new(T::Handle(
                                h.clone(),
                                Rc::new(app(T::Var(ss.clone()), T::Var(x.clone()))),
                                Rc::new(e),
                            )),
                        ),
                    );
                    let call = app(
                        app(app(app(h.trav.clone(), T::Int(n)), (**s).clone()), l),
                        resume(&ctx),
                    );
                    Ok(R::Step(call))
                }
            }
        }
        T::Table(ts) => step_seq(ts, T::Table),
        T::Tuple(ts) => step_seq(ts, T::Tuple),
        T::Left(a) => Ok(inside(a, |c| T::Left(Rc::new(c)))?.unwrap_or(R::Value)),
        T::Right(a) => Ok(inside(a, |c| T::Right(Rc::new(c)))?.unwrap_or(R::Value)),
        T::If(c, a, b) => {
            if let Some(r) = inside(c, |x| T::If(Rc::new(x), a.clone(), b.clone()))? {
                return Ok(r);
            }
            match **c {
                T::Bool(true) => Ok(R::Step((**a).clone())),
                T::Bool(false) => Ok(R::Step((**b).clone())),
                _ => Err("if on a non-boolean".into()),
            }
        }
        T::Case(e, l, lb, r, rb) => {
            let rebuild = |x| T::Case(Rc::new(x), l.clone(), lb.clone(), r.clone(), rb.clone());
            if let Some(res) = inside(e, rebuild)? {
                return Ok(res);
            }
            match &**e {
                T::Left(v) => Ok(R::Step(subst(lb, l, v))),
                T::Right(v) => Ok(R::Step(subst(rb, r, v))),
                _ => Err("case on a non-Either".into()),
            }
        }
        T::Prim(p, args) => {
            // A saturated builtin: only built by `apply`, all arguments values.
            Ok(R::Step(prim(*p, args)?))
        }
        _ => Err(format!("stuck term {t:?}")),
    }
}

fn apply(f: &T, a: &T) -> Res<R> {
    match f {
        // (app)
        T::Lam(x, b) => Ok(R::Step(subst(b, x, a))),
        // (index)
        T::Table(vs) => match a {
            T::Int(i) if *i >= 0 && (*i as usize) < vs.len() => {
                Ok(R::Step(vs[*i as usize].clone()))
            }
            _ => Err(format!(
                "index out of bounds: {a:?} on table of length {}",
                vs.len()
            )),
        },
        T::Perform(op) => Ok(R::Op(op.clone(), a.clone(), T::Hole)),
        T::Prim(p, args) => {
            let mut args = args.clone();
            args.push(a.clone());
            Ok(R::Step(T::Prim(*p, args)))
        }
        _ => Err("applied non-function".into()),
    }
}

fn prim(p: P, args: &[T]) -> Res<T> {
    use T::*;
    let bad = || Err(format!("bad operands for {p:?}: {args:?}"));
    Ok(match (p, args) {
        (P::Add, [Int(a), Int(b)]) => Int(a.checked_add(*b).ok_or("overflow")?),
        (P::Sub, [Int(a), Int(b)]) => Int(a.checked_sub(*b).ok_or("overflow")?),
        (P::Mul, [Int(a), Int(b)]) => Int(a.checked_mul(*b).ok_or("overflow")?),
        (P::Add, [Float(a), Float(b)]) => Float(a + b),
        (P::Sub, [Float(a), Float(b)]) => Float(a - b),
        (P::Mul, [Float(a), Float(b)]) => Float(a * b),
        (P::Div, [Float(a), Float(b)]) => Float(a / b),
        (P::Eq, [a, b]) => Bool(a == b),
        (P::Lt, [Int(a), Int(b)]) => Bool(a < b),
        (P::Le, [Int(a), Int(b)]) => Bool(a <= b),
        (P::Gt, [Int(a), Int(b)]) => Bool(a > b),
        (P::Ge, [Int(a), Int(b)]) => Bool(a >= b),
        (P::Append, [Str(a), Str(b)]) => Str(Rc::from(format!("{a}{b}"))),
        (P::Length, [Table(t)]) => Int(t.len() as i64),
        (P::Fst, [Tuple(t)]) if t.len() == 2 => t[0].clone(),
        (P::Snd, [Tuple(t)]) if t.len() == 2 => t[1].clone(),
        (P::Proj { index, arity }, [Tuple(t)]) if t.len() == arity as usize => {
            t[index as usize].clone()
        }
        (P::ToString, [Int(i)]) => Str(Rc::from(i.to_string())),
        (P::MkLeft, [v]) => Left(Rc::new(v.clone())),
        (P::MkRight, [v]) => Right(Rc::new(v.clone())),
        (P::Concat, [Table(ts)]) => {
            let mut out = Vec::new();
            for t in ts {
                match t {
                    Table(xs) => out.extend(xs.iter().cloned()),
                    _ => return bad(),
                }
            }
            Table(out)
        }
        // Unfolded as a left fold; callers only pass associative operators.
        (P::Reduce, [f, Table(ts)]) => {
            let (first, rest) = ts.split_first().ok_or("reduce of empty table")?;
            rest.iter()
                .fold(first.clone(), |acc, x| app(app(f.clone(), acc), x.clone()))
        }
        (P::FirstFailure, [Table(ts)]) => {
            let mut oks = Vec::new();
            for t in ts {
                match t {
                    Left(_) => return Ok(t.clone()),
                    Right(v) => oks.push((**v).clone()),
                    _ => return bad(),
                }
            }
            Right(Rc::new(Table(oks)))
        }
        (P::CartesianProd, [Table(ts)]) => {
            let mut acc: Vec<Vec<T>> = vec![Vec::new()];
            for t in ts {
                let Table(choices) = t else { return bad() };
                acc = acc
                    .into_iter()
                    .flat_map(|pre| {
                        choices.iter().map(move |c| {
                            let mut v = pre.clone();
                            v.push(c.clone());
                            v
                        })
                    })
                    .collect();
            }
            Table(acc.into_iter().map(Table).collect())
        }
        _ => return bad(),
    })
}

/// Reduces a closed term to a value. A loop that escapes every handler
/// has its iterations reduced one after another.
pub fn eval(t: T) -> Res<T> {
    let mut t = t;
    loop {
        match step(&t)? {
            R::Value => return Ok(t),
            R::Step(t2) => t = t2,
            R::Op(op, ..) => return Err(format!("unhandled operation {op}")),
            // (parallel)
            R::Loop(x, n, body, ctx) => {
                let items = (0..n)
                    .map(|i| eval(subst(&body, &x, &T::Int(i))))
                    .collect::<Res<Vec<_>>>()?;
                t = plug(&ctx, &T::Table(items));
            }
        }
    }
}

/// Prints a first-order value the way the interpreter does.
pub fn show(t: &T) -> String {
    let join = |ts: &[T]| ts.iter().map(show).collect::<Vec<_>>().join(", ");
    let payload = |v: &T| match v {
        T::Int(i) if *i < 0 => format!("({i})"),
        T::Left(_) | T::Right(_) => format!("({})", show(v)),
        _ => show(v),
    };
    match t {
        T::Int(i) => i.to_string(),
        T::Bool(b) => b.to_string(),
        T::Unit => "()".into(),
        T::Str(s) => format!("{s:?}"),
        T::Table(ts) => format!("[{}]", join(ts)),
        T::Tuple(ts) => format!("({})", join(ts)),
        T::Left(v) => format!("Left {}", payload(v)),
        T::Right(v) => format!("Right {}", payload(v)),
        T::Float(f) => format!("{f:?}"),
        _ => "<function>".into(),
    }
}
