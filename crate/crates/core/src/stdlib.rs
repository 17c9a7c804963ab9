//! Host builtins and the prelude handlers.

use std::sync::Arc;

use crate::error::RuntimeError;
use crate::machine::{self, EvalResult, Machine, Step};
use crate::syntax::{value_eq, Value};

/// Source of the prelude, loaded in front of every program unless disabled.
pub const PRELUDE: &str = include_str!("prelude.lp");

pub fn prelude_source() -> &'static str {
    PRELUDE
}

/// Host primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
    Append,
    Length,
    Fst,
    Snd,
    Concat,
    ToString,
    Reduce,
    FirstFailure,
    CartesianProd,
    SplitKey,
    GenUniform,
    NewKey,
    MkLeft,
    MkRight,
    /// Component `index` of a tuple that must have exactly `arity` fields.
    /// Only produced by desugaring tuple patterns.
    Proj {
        index: u32,
        arity: u32,
    },
}

const NAMED: &[(&str, Prim)] = &[
    ("+", Prim::Add),
    ("-", Prim::Sub),
    ("*", Prim::Mul),
    ("/", Prim::Div),
    ("==", Prim::Eq),
    ("<", Prim::Lt),
    ("<=", Prim::Le),
    (">", Prim::Gt),
    (">=", Prim::Ge),
    ("++", Prim::Append),
    ("length", Prim::Length),
    ("fst", Prim::Fst),
    ("snd", Prim::Snd),
    ("concat", Prim::Concat),
    ("toString", Prim::ToString),
    ("reduce", Prim::Reduce),
    ("firstFailure", Prim::FirstFailure),
    ("cartesianProd", Prim::CartesianProd),
    ("splitKey", Prim::SplitKey),
    ("genUniform", Prim::GenUniform),
    ("newKey", Prim::NewKey),
    ("Left", Prim::MkLeft),
    ("Right", Prim::MkRight),
];

impl Prim {
    pub fn from_name(name: &str) -> Option<Prim> {
        NAMED.iter().find(|(n, _)| *n == name).map(|(_, p)| *p)
    }

    pub fn names() -> impl Iterator<Item = &'static str> {
        NAMED.iter().map(|(n, _)| *n)
    }

    pub fn name(self) -> &'static str {
        match self {
            Prim::Proj { .. } => "tuple pattern",
            p => NAMED
                .iter()
                .find(|(_, q)| *q == p)
                .map(|(n, _)| *n)
                .expect("every named prim is listed"),
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Prim::Add
            | Prim::Sub
            | Prim::Mul
            | Prim::Div
            | Prim::Eq
            | Prim::Lt
            | Prim::Le
            | Prim::Gt
            | Prim::Ge
            | Prim::Append
            | Prim::Reduce
            | Prim::SplitKey => 2,
            _ => 1,
        }
    }
}

pub(crate) fn call(
    m: &mut Machine,
    prim: Prim,
    args: Vec<Value>,
    depth: usize,
) -> EvalResult<Step> {
    if prim == Prim::Reduce {
        let table = expect_table(prim, &args[1])?;
        return machine::reduce(m, &args[0], table, depth);
    }
    call_pure(prim, &args).map(Step::Done)
}

/// Every builtin except `reduce`, which calls back into the evaluator.
pub fn call_pure(prim: Prim, args: &[Value]) -> EvalResult<Value> {
    use Value::*;
    let name = prim.name();
    match prim {
        Prim::Add | Prim::Sub | Prim::Mul => arith(prim, &args[0], &args[1]),
        Prim::Div => match (&args[0], &args[1]) {
            (Float(a), Float(b)) => Ok(Float(a / b)),
            (a, b) => Err(operand_error(name, a, b)),
        },
        Prim::Eq => Ok(Bool(value_eq(&args[0], &args[1])?)),
        Prim::Lt | Prim::Le | Prim::Gt | Prim::Ge => compare(prim, &args[0], &args[1]),
        Prim::Append => match (&args[0], &args[1]) {
            (Str(a), Str(b)) => Ok(Value::Str(Arc::from(format!("{a}{b}")))),
            (a, b) => Err(operand_error(name, a, b)),
        },
        Prim::Length => Ok(Int(expect_table(prim, &args[0])?.len() as i64)),
        Prim::Fst | Prim::Snd => match &args[0] {
            Tuple(vs) if vs.len() == 2 => Ok(vs[usize::from(prim == Prim::Snd)].clone()),
            other => Err(RuntimeError::builtin(
                name,
                format!("expected a pair, got {}", other.kind()),
            )),
        },
        Prim::Proj { index, arity } => match &args[0] {
            Tuple(vs) if vs.len() == arity as usize => Ok(vs[index as usize].clone()),
            Tuple(vs) => Err(RuntimeError::builtin(
                name,
                format!(
                    "pattern of arity {arity} matched against a tuple of arity {}",
                    vs.len()
                ),
            )),
            other => Err(RuntimeError::builtin(
                name,
                format!("expected a tuple, got {}", other.kind()),
            )),
        },
        Prim::Concat => concat(expect_table(prim, &args[0])?),
        Prim::ToString => match &args[0] {
            Int(i) => Ok(Value::str(&i.to_string())),
            other => Err(RuntimeError::builtin(
                name,
                format!("expected an int, got {}", other.kind()),
            )),
        },
        Prim::FirstFailure => first_failure(expect_table(prim, &args[0])?),
        Prim::CartesianProd => cartesian_prod(expect_table(prim, &args[0])?),
        Prim::SplitKey => match (&args[0], &args[1]) {
            (Key(k), Int(n)) if *n >= 0 => Ok(Value::table(
                split_key(*k, *n as usize).into_iter().map(Key).collect(),
            )),
            (Key(_), Int(n)) => Err(RuntimeError::builtin(name, format!("negative count {n}"))),
            (a, b) => Err(operand_error(name, a, b)),
        },
        Prim::GenUniform => match &args[0] {
            Key(k) => Ok(Float(gen_uniform(*k))),
            other => Err(RuntimeError::builtin(
                name,
                format!("expected a key, got {}", other.kind()),
            )),
        },
        Prim::NewKey => match &args[0] {
            Int(seed) => Ok(Key(*seed as u64)),
            other => Err(RuntimeError::builtin(
                name,
                format!("expected an int seed, got {}", other.kind()),
            )),
        },
        Prim::MkLeft => Ok(Value::left(args[0].clone())),
        Prim::MkRight => Ok(Value::right(args[0].clone())),
        Prim::Reduce => unreachable!("reduce is dispatched in call"),
    }
}

fn operand_error(name: &'static str, a: &Value, b: &Value) -> RuntimeError {
    RuntimeError::builtin(
        name,
        format!("unsupported operands {} and {}", a.kind(), b.kind()),
    )
}

fn expect_table(prim: Prim, v: &Value) -> EvalResult<&Arc<[Value]>> {
    v.as_table().ok_or_else(|| {
        RuntimeError::builtin(prim.name(), format!("expected a table, got {}", v.kind()))
    })
}

fn arith(prim: Prim, a: &Value, b: &Value) -> EvalResult<Value> {
    let name = prim.name();
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => {
            let r = match prim {
                Prim::Add => x.checked_add(*y),
                Prim::Sub => x.checked_sub(*y),
                _ => x.checked_mul(*y),
            };
            r.map(Value::Int).ok_or(RuntimeError::Overflow(name))
        }
        (Value::Float(x), Value::Float(y)) => Ok(Value::Float(match prim {
            Prim::Add => x + y,
            Prim::Sub => x - y,
            _ => x * y,
        })),
        _ => Err(operand_error(name, a, b)),
    }
}

fn compare(prim: Prim, a: &Value, b: &Value) -> EvalResult<Value> {
    let ord = match (a, b) {
        (Value::Int(x), Value::Int(y)) => x.partial_cmp(y),
        (Value::Float(x), Value::Float(y)) => x.partial_cmp(y),
        _ => return Err(operand_error(prim.name(), a, b)),
    };
    let Some(ord) = ord else {
        return Ok(Value::Bool(false));
    };
    Ok(Value::Bool(match prim {
        Prim::Lt => ord.is_lt(),
        Prim::Le => ord.is_le(),
        Prim::Gt => ord.is_gt(),
        _ => ord.is_ge(),
    }))
}

/// Flattens a table of tables, preserving order.
pub fn concat(tables: &[Value]) -> EvalResult<Value> {
    let mut out = Vec::new();
    for t in tables {
        match t {
            Value::Table(items) => out.extend(items.iter().cloned()),
            other => {
                return Err(RuntimeError::builtin(
                    "concat",
                    format!("expected a table of tables, found {}", other.kind()),
                ))
            }
        }
    }
    Ok(Value::table(out))
}

/// The lowest-index `Left`, or `Right` of all unwrapped payloads.
pub fn first_failure(items: &[Value]) -> EvalResult<Value> {
    let mut oks = Vec::with_capacity(items.len());
    for item in items {
        match item {
            Value::Left(_) => return Ok(item.clone()),
            Value::Right(v) => oks.push((**v).clone()),
            _ => return Err(RuntimeError::builtin("firstFailure", "not an Either")),
        }
    }
    Ok(Value::right(Value::table(oks)))
}

/// All ways of picking one element from each inner table, last coordinate
/// varying fastest.
pub fn cartesian_prod(factors: &[Value]) -> EvalResult<Value> {
    let mut tables = Vec::with_capacity(factors.len());
    for f in factors {
        match f {
            Value::Table(t) => tables.push(t),
            other => {
                return Err(RuntimeError::builtin(
                    "cartesianProd",
                    format!("expected a table of tables, found {}", other.kind()),
                ))
            }
        }
    }
    let total = tables
        .iter()
        .try_fold(1usize, |acc, t| acc.checked_mul(t.len()))
        .ok_or(RuntimeError::Overflow("cartesianProd"))?;
    let mut out = Vec::with_capacity(total);
    for mut r in 0..total {
        let mut pick = vec![Value::Unit; tables.len()];
        for (slot, t) in pick.iter_mut().zip(tables.iter()).rev() {
            *slot = t[r % t.len()].clone();
            r /= t.len();
        }
        out.push(Value::table(pick));
    }
    Ok(Value::table(out))
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output mixer.
pub fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n` child keys; child `i` is `finalize(key ^ GAMMA·(i+1))`.
pub fn split_key(key: u64, n: usize) -> Vec<u64> {
    (1..=n as u64)
        .map(|i| finalize(key ^ GAMMA.wrapping_mul(i)))
        .collect()
}

/// Uniform sample in [0, 1) from the top 53 bits of the mixed key.
pub fn gen_uniform(key: u64) -> f64 {
    (finalize(key) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
