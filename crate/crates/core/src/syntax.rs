//! Core syntax and runtime values.
//!
//! The surface language is desugared into [`Expr`]; evaluation produces
//! [`Value`]s. Both are immutable and cheap to clone (children sit behind
//! `Arc`), so they can be shared freely between parallel iterations and
//! between multiple invocations of the same resumption.

use std::fmt;
use std::sync::Arc;

use crate::error::RuntimeError;
use crate::machine::Resumption;
use crate::stdlib::Prim;

/// Identifier. Operator identifiers are stored without their parentheses,
/// so `(<>)` is the name `<>`.
pub type Name = Arc<str>;

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Str(Arc<str>),
    Bool(bool),
    Unit,
}

/// Desugared core expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Literal),
    Var(Name),
    Lam(Name, Arc<Expr>),
    App(Arc<Expr>, Arc<Expr>),
    For {
        var: Name,
        size: Arc<Expr>,
        body: Arc<Expr>,
    },
    Handle {
        handler: Arc<HandlerExpr>,
        state: Arc<Expr>,
        body: Arc<Expr>,
    },
    /// `perform op`: a unary function value raising `op` on its argument.
    Perform(Name),
    Table(Arc<[Expr]>),
    Tuple(Arc<[Expr]>),
    If {
        cond: Arc<Expr>,
        then: Arc<Expr>,
        otherwise: Arc<Expr>,
    },
    CaseEither {
        scrutinee: Arc<Expr>,
        left_var: Name,
        left: Arc<Expr>,
        right_var: Name,
        right: Arc<Expr>,
    },
    Builtin(Prim),
}

/// A handler as written: one operation and three clause expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct HandlerExpr {
    pub op: Name,
    pub on_return: Expr,
    pub on_op: Expr,
    pub on_traverse: Expr,
}

impl Expr {
    pub fn app(f: Expr, a: Expr) -> Expr {
        Expr::App(Arc::new(f), Arc::new(a))
    }

    pub fn apps(f: Expr, args: impl IntoIterator<Item = Expr>) -> Expr {
        args.into_iter().fold(f, Expr::app)
    }

    pub fn lam(param: impl Into<Name>, body: Expr) -> Expr {
        Expr::Lam(param.into(), Arc::new(body))
    }

    pub fn var(name: impl Into<Name>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn int(i: i64) -> Expr {
        Expr::Lit(Literal::Int(i))
    }

    pub fn unit() -> Expr {
        Expr::Lit(Literal::Unit)
    }
}

/// Runtime value.
#[derive(Clone)]
pub enum Value {
    Int(i64),
    Float(f64),
    Str(Arc<str>),
    Bool(bool),
    Unit,
    Tuple(Arc<[Value]>),
    Table(Arc<[Value]>),
    Left(Arc<Value>),
    Right(Arc<Value>),
    /// Splittable PRNG key.
    Key(u64),
    Closure(Arc<Closure>),
    Builtin(Arc<Partial>),
    Perform(Name),
    Resume(Arc<Resumption>),
}

pub struct Closure {
    pub param: Name,
    pub body: Arc<Expr>,
    pub env: Env,
}

/// A builtin together with the arguments supplied so far.
#[derive(Clone)]
pub struct Partial {
    pub prim: Prim,
    pub args: Vec<Value>,
}

impl Value {
    pub fn str(s: &str) -> Value {
        Value::Str(Arc::from(s))
    }

    pub fn table(elems: Vec<Value>) -> Value {
        Value::Table(Arc::from(elems))
    }

    pub fn tuple(elems: Vec<Value>) -> Value {
        Value::Tuple(Arc::from(elems))
    }

    pub fn left(v: Value) -> Value {
        Value::Left(Arc::new(v))
    }

    pub fn right(v: Value) -> Value {
        Value::Right(Arc::new(v))
    }

    pub fn is_function(&self) -> bool {
        matches!(
            self,
            Value::Closure(_) | Value::Builtin(_) | Value::Perform(_) | Value::Resume(_)
        )
    }

    /// Short kind name used in error messages.
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Str(_) => "string",
            Value::Bool(_) => "bool",
            Value::Unit => "unit",
            Value::Tuple(_) => "tuple",
            Value::Table(_) => "table",
            Value::Left(_) => "Left",
            Value::Right(_) => "Right",
            Value::Key(_) => "key",
            Value::Closure(_) | Value::Builtin(_) | Value::Perform(_) | Value::Resume(_) => {
                "function"
            }
        }
    }

    pub fn as_table(&self) -> Option<&Arc<[Value]>> {
        match self {
            Value::Table(t) => Some(t),
            _ => None,
        }
    }
}

impl From<&Literal> for Value {
    fn from(lit: &Literal) -> Value {
        match lit {
            Literal::Int(i) => Value::Int(*i),
            Literal::Float(x) => Value::Float(*x),
            Literal::Str(s) => Value::Str(s.clone()),
            Literal::Bool(b) => Value::Bool(*b),
            Literal::Unit => Value::Unit,
        }
    }
}

/// Structural equality on first-order values.
pub fn value_eq(a: &Value, b: &Value) -> Result<bool, RuntimeError> {
    use Value::*;
    if a.is_function() || b.is_function() {
        return Err(RuntimeError::CompareFunctions);
    }
    Ok(match (a, b) {
        (Int(x), Int(y)) => x == y,
        (Float(x), Float(y)) => x == y,
        (Str(x), Str(y)) => x == y,
        (Bool(x), Bool(y)) => x == y,
        (Unit, Unit) => true,
        (Key(x), Key(y)) => x == y,
        (Tuple(xs), Tuple(ys)) | (Table(xs), Table(ys)) => {
            if xs.len() != ys.len() {
                // Still reject functions hidden inside the longer side.
                for v in xs.iter().chain(ys.iter()) {
                    value_eq(v, v)?;
                }
                return Ok(false);
            }
            let mut all = true;
            for (x, y) in xs.iter().zip(ys.iter()) {
                all &= value_eq(x, y)?;
            }
            all
        }
        (Left(x), Left(y)) | (Right(x), Right(y)) => value_eq(x, y)?,
        _ => false,
    })
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => f.write_str(&format_float(*x)),
            Value::Str(s) => f.write_str(&quote_str(s)),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Unit => f.write_str("()"),
            Value::Tuple(vs) => {
                f.write_str("(")?;
                write_list(f, vs)?;
                f.write_str(")")
            }
            Value::Table(vs) => {
                f.write_str("[")?;
                write_list(f, vs)?;
                f.write_str("]")
            }
            Value::Left(v) => write_tagged(f, "Left", v),
            Value::Right(v) => write_tagged(f, "Right", v),
            Value::Key(k) => write!(f, "Key({k:016x})"),
            Value::Closure(_) | Value::Builtin(_) | Value::Perform(_) | Value::Resume(_) => {
                f.write_str("<function>")
            }
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Canonical rendering of a value, as printed by `lambdap run`.
pub fn print_value(v: &Value) -> String {
    v.to_string()
}

fn write_list(f: &mut fmt::Formatter<'_>, vs: &[Value]) -> fmt::Result {
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

fn write_tagged(f: &mut fmt::Formatter<'_>, tag: &str, payload: &Value) -> fmt::Result {
    // The payload sits in argument position, so anything that would not
    // re-parse as a single atom gets parenthesised.
    let needs_parens = match payload {
        Value::Left(_) | Value::Right(_) | Value::Key(_) => true,
        Value::Int(i) => *i < 0,
        Value::Float(x) => x.is_sign_negative(),
        _ => false,
    };
    if needs_parens {
        write!(f, "{tag} ({payload})")
    } else {
        write!(f, "{tag} {payload}")
    }
}

/// Floats always carry a decimal point so they never read back as ints.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:?}");
    if s.contains('.') {
        s
    } else if let Some(pos) = s.find('e') {
        format!("{}.0{}", &s[..pos], &s[pos..])
    } else {
        format!("{s}.0")
    }
}

pub fn quote_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => out.push_str(&format!("\\u{{{:x}}}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Persistent environment: extension never disturbs environments already
/// captured by closures or resumptions.
#[derive(Clone, Default)]
pub struct Env(Option<Arc<EnvNode>>);

struct EnvNode {
    name: Name,
    value: Value,
    next: Env,
}

impl Env {
    pub fn new() -> Env {
        Env(None)
    }

    pub fn extend(&self, name: Name, value: Value) -> Env {
        Env(Some(Arc::new(EnvNode {
            name,
            value,
            next: self.clone(),
        })))
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if &*node.name == name {
                return Some(&node.value);
            }
            cur = &node.next.0;
        }
        None
    }
}

impl Drop for Env {
    // Long chains would otherwise drop recursively.
    fn drop(&mut self) {
        let mut cur = self.0.take();
        while let Some(node) = cur {
            match Arc::try_unwrap(node) {
                Ok(mut node) => cur = node.next.0.take(),
                Err(_) => break,
            }
        }
    }
}
