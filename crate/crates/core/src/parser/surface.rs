//! Surface syntax tree and a printer that produces re-parseable source.

use std::fmt::{self, Write};

use crate::error::Pos;
use crate::syntax::{format_float, quote_str, Literal, Name};

use super::lexer::is_op_char;

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceProgram {
    pub definitions: Vec<Definition>,
    pub main: Option<SurfaceExpr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Definition {
    pub pattern: Pattern,
    pub body: SurfaceExpr,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    Var(Name, Pos),
    Wild,
    Tuple(Vec<Pattern>),
    Table(Vec<Pattern>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClauseKey {
    Return,
    Traverse,
    Op(Name),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub key: ClauseKey,
    pub body: SurfaceExpr,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceExpr {
    Lit(Literal),
    Var(Name, Pos),
    /// `None` binder is `_`.
    Lam(Option<Name>, Box<SurfaceExpr>),
    App(Box<SurfaceExpr>, Box<SurfaceExpr>),
    Infix(Name, Pos, Box<SurfaceExpr>, Box<SurfaceExpr>),
    For(Option<Name>, Box<SurfaceExpr>, Box<SurfaceExpr>),
    /// `handle` (or, with `thunk`, `handler`) block.
    Handle {
        clauses: Vec<Clause>,
        state: Box<SurfaceExpr>,
        body: Box<SurfaceExpr>,
        thunk: bool,
        pos: Pos,
    },
    Perform(Name),
    Table(Vec<SurfaceExpr>),
    Tuple(Vec<SurfaceExpr>),
    If(Box<SurfaceExpr>, Box<SurfaceExpr>, Box<SurfaceExpr>),
    Case {
        scrutinee: Box<SurfaceExpr>,
        left: (Option<Name>, Box<SurfaceExpr>),
        right: (Option<Name>, Box<SurfaceExpr>),
    },
    /// `pattern <- rhs; rest`
    Bind(Pattern, Box<SurfaceExpr>, Box<SurfaceExpr>),
    /// `first; rest`
    Seq(Box<SurfaceExpr>, Box<SurfaceExpr>),
}

pub fn is_operator_name(name: &str) -> bool {
    name.chars().next().is_some_and(is_op_char)
}

fn write_name(out: &mut String, name: &str) {
    if is_operator_name(name) {
        write!(out, "({name})").unwrap();
    } else {
        out.push_str(name);
    }
}

fn write_binder(out: &mut String, b: &Option<Name>) {
    match b {
        Some(n) => write_name(out, n),
        None => out.push('_'),
    }
}

fn write_pattern(out: &mut String, p: &Pattern) {
    match p {
        Pattern::Var(n, _) => write_name(out, n),
        Pattern::Wild => out.push('_'),
        Pattern::Tuple(ps) | Pattern::Table(ps) => {
            let (open, close) = if matches!(p, Pattern::Tuple(_)) {
                ('(', ')')
            } else {
                ('[', ']')
            };
            out.push(open);
            for (i, q) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_pattern(out, q);
            }
            out.push(close);
        }
    }
}

fn write_lit(out: &mut String, lit: &Literal) {
    match lit {
        Literal::Int(i) if *i < 0 => write!(out, "({i})").unwrap(),
        Literal::Int(i) => write!(out, "{i}").unwrap(),
        Literal::Float(x) if x.is_sign_negative() => write!(out, "({})", format_float(*x)).unwrap(),
        Literal::Float(x) => out.push_str(&format_float(*x)),
        Literal::Str(s) => out.push_str(&quote_str(s)),
        Literal::Bool(b) => write!(out, "{b}").unwrap(),
        Literal::Unit => out.push_str("()"),
    }
}

/// Prints `e` on one line. Every compound form is parenthesised, so the
/// output never depends on precedence.
pub fn write_expr(out: &mut String, e: &SurfaceExpr) {
    match e {
        SurfaceExpr::Lit(l) => write_lit(out, l),
        SurfaceExpr::Var(n, _) => write_name(out, n),
        SurfaceExpr::Lam(b, body) => {
            out.push_str("(\\");
            write_binder(out, b);
            out.push_str(". ");
            write_expr(out, body);
            out.push(')');
        }
        SurfaceExpr::App(f, a) => {
            out.push('(');
            write_expr(out, f);
            out.push(' ');
            write_expr(out, a);
            out.push(')');
        }
        SurfaceExpr::Infix(op, _, a, b) => {
            out.push('(');
            write_expr(out, a);
            write!(out, " {op} ").unwrap();
            write_expr(out, b);
            out.push(')');
        }
        SurfaceExpr::For(x, n, body) => {
            out.push_str("(for ");
            write_binder(out, x);
            out.push(':');
            write_expr(out, n);
            out.push_str(". ");
            write_expr(out, body);
            out.push(')');
        }
        SurfaceExpr::Handle {
            clauses,
            state,
            body,
            thunk,
            ..
        } => {
            out.push_str(if *thunk { "(handler {" } else { "(handle {" });
            for (i, c) in clauses.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push(' ');
                match &c.key {
                    ClauseKey::Return => out.push_str("return"),
                    ClauseKey::Traverse => out.push_str("traverse"),
                    ClauseKey::Op(n) => out.push_str(n),
                }
                out.push_str(" |-> ");
                write_expr(out, &c.body);
            }
            out.push_str(" } ");
            write_expr(out, state);
            out.push(' ');
            write_expr(out, body);
            out.push(')');
        }
        SurfaceExpr::Perform(op) => write!(out, "(perform {op})").unwrap(),
        SurfaceExpr::Table(es) => {
            out.push('[');
            write_list(out, es);
            out.push(']');
        }
        SurfaceExpr::Tuple(es) => {
            out.push('(');
            write_list(out, es);
            out.push(')');
        }
        SurfaceExpr::If(c, t, f) => {
            out.push_str("(if ");
            write_expr(out, c);
            out.push_str(" then ");
            write_expr(out, t);
            out.push_str(" else ");
            write_expr(out, f);
            out.push(')');
        }
        SurfaceExpr::Case {
            scrutinee,
            left,
            right,
        } => {
            out.push_str("(case ");
            write_expr(out, scrutinee);
            out.push_str(" of Left ");
            write_binder(out, &left.0);
            out.push_str(" -> ");
            write_expr(out, &left.1);
            out.push_str(" | Right ");
            write_binder(out, &right.0);
            out.push_str(" -> ");
            write_expr(out, &right.1);
            out.push(')');
        }
        SurfaceExpr::Bind(p, rhs, rest) => {
            out.push('(');
            write_pattern(out, p);
            out.push_str(" <- ");
            write_expr(out, rhs);
            out.push_str("; ");
            write_expr(out, rest);
            out.push(')');
        }
        SurfaceExpr::Seq(a, b) => {
            out.push('(');
            write_expr(out, a);
            out.push_str("; ");
            write_expr(out, b);
            out.push(')');
        }
    }
}

fn write_list(out: &mut String, es: &[SurfaceExpr]) {
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, e);
    }
}

/// Source text that parses back to `program`.
pub fn print_program(program: &SurfaceProgram) -> String {
    let mut out = String::new();
    for def in &program.definitions {
        write_pattern(&mut out, &def.pattern);
        out.push_str(" = ");
        write_expr(&mut out, &def.body);
        out.push('\n');
    }
    if let Some(main) = &program.main {
        write_expr(&mut out, main);
        out.push('\n');
    }
    out
}

impl fmt::Display for SurfaceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self);
        f.write_str(&s)
    }
}
