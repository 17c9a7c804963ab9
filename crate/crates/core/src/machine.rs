//! The evaluator.
//!
//! Evaluating an expression yields a [`Step`]: either a final value, or a
//! suspension carrying the request that escaped (an operation, or a `for`
//! loop) together with the chain of frames needed to resume the context it
//! escaped from. Handle frames intercept suspensions on their way out; a
//! loop request that reaches the top is run by [`crate::runtime`].
//!
//! Chains are plain data and are never mutated once captured, so a
//! resumption may be invoked any number of times, from any thread.

use std::sync::Arc;

use crate::error::RuntimeError;
use crate::stdlib;
use crate::syntax::{Closure, Env, Expr, HandlerExpr, Name, Partial, Value};
use crate::trace::{Rule, TraceEvent};

pub type EvalResult<T> = Result<T, RuntimeError>;

/// Evaluated handler clauses.
pub struct HandlerValue {
    pub op: Name,
    pub on_return: Value,
    pub on_op: Value,
    pub on_traverse: Value,
}

pub enum Step {
    Done(Value),
    Suspended(Box<Suspension>),
}

pub struct Suspension {
    pub request: Request,
    pub chain: ResumeChain,
}

pub enum Request {
    /// `perform op arg` looking for its handler.
    Op { op: Name, arg: Value },
    /// `for x:size. body` looking for the enclosing handlers.
    Loop { size: usize, body: Arc<LoopBody> },
}

/// The body of a pending loop, as a function of the iteration index.
pub enum LoopBody {
    /// The loop as written: `body` under `env` with `var` bound to the index.
    Source {
        var: Name,
        body: Arc<Expr>,
        env: Env,
    },
    /// A loop that already passed a handler's traverse clause: every
    /// iteration runs inside that handler, seeded from its state table.
    Wrapped {
        handler: Arc<HandlerValue>,
        states: Arc<[Value]>,
        inner: Arc<LoopBody>,
    },
}

/// Frames between a suspension point and where it is currently being
/// examined, innermost first.
#[derive(Clone, Default)]
pub struct ResumeChain {
    frames: Vec<Frame>,
}

impl ResumeChain {
    pub fn new() -> ResumeChain {
        ResumeChain::default()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn handle_frames(&self) -> usize {
        self.frames
            .iter()
            .filter(|f| matches!(f, Frame::Handle { .. }))
            .count()
    }

    fn push(&mut self, frame: Frame) {
        self.frames.push(frame);
    }
}

#[derive(Clone)]
enum Frame {
    /// Function evaluated; evaluate the argument next.
    EvalArg { arg: Arc<Expr>, env: Env },
    /// Argument evaluated; apply this function to it.
    ApplyFn { func: Value },
    /// Function value received; apply it to this argument.
    ApplyTo { arg: Value },
    ForSize {
        var: Name,
        body: Arc<Expr>,
        env: Env,
    },
    Collect {
        kind: Collect,
        exprs: Arc<[Expr]>,
        done: Vec<Value>,
        env: Env,
    },
    If {
        then: Arc<Expr>,
        otherwise: Arc<Expr>,
        env: Env,
    },
    Case {
        left_var: Name,
        left: Arc<Expr>,
        right_var: Name,
        right: Arc<Expr>,
        env: Env,
    },
    Handle {
        handler: Arc<HandlerValue>,
        state: Value,
    },
    /// Left half of a balanced reduction is done; reduce `items[mid..hi]`.
    ReduceRight {
        func: Value,
        items: Arc<[Value]>,
        mid: usize,
        hi: usize,
    },
    /// Both halves done; combine.
    ReduceCombine { func: Value, left: Value },
}

#[derive(Clone)]
enum Collect {
    Tuple,
    Table,
    /// Clauses and state of a handle frame; the body comes last.
    Handle {
        op: Name,
        body: Arc<Expr>,
    },
}

/// First-class continuations handed to handler clauses.
pub enum Resumption {
    /// `k`: takes a state, then a value, and reinstalls the handler around
    /// the captured chain.
    Continue {
        handler: Arc<HandlerValue>,
        chain: Arc<ResumeChain>,
        state: Option<Value>,
    },
    /// `l`: takes a table of states and re-raises the loop with every
    /// iteration wrapped in the handler.
    Loop {
        handler: Arc<HandlerValue>,
        size: usize,
        body: Arc<LoopBody>,
    },
}

impl Step {
    fn suspend(request: Request) -> Step {
        Step::Suspended(Box::new(Suspension {
            request,
            chain: ResumeChain::new(),
        }))
    }
}

fn push(mut susp: Box<Suspension>, frame: Frame) -> Step {
    susp.chain.push(frame);
    Step::Suspended(susp)
}

/// One evaluation thread. Holds only the (optional) trace buffer; all
/// program data lives in immutable values.
pub struct Machine {
    trace: Option<Vec<TraceEvent>>,
}

impl Machine {
    pub fn new(tracing: bool) -> Machine {
        Machine {
            trace: tracing.then(Vec::new),
        }
    }

    pub fn tracing(&self) -> bool {
        self.trace.is_some()
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub(crate) fn extend_trace(&mut self, events: impl IntoIterator<Item = TraceEvent>) {
        if let Some(t) = &mut self.trace {
            t.extend(events);
        }
    }

    pub(crate) fn event(&mut self, rule: Rule, depth: usize, detail: impl FnOnce() -> String) {
        if let Some(t) = &mut self.trace {
            t.push(TraceEvent {
                rule,
                depth,
                path: Vec::new(),
                detail: detail(),
            });
        }
    }

    /// Evaluates `expr` under `env`. `depth` counts the handle frames
    /// enclosing the expression.
    pub fn eval(&mut self, env: &Env, expr: &Expr, depth: usize) -> EvalResult<Step> {
        match expr {
            Expr::Lit(lit) => Ok(Step::Done(lit.into())),
            Expr::Var(x) => env
                .lookup(x)
                .cloned()
                .map(Step::Done)
                .ok_or_else(|| RuntimeError::UnboundVariable(x.to_string())),
            Expr::Lam(param, body) => Ok(Step::Done(Value::Closure(Arc::new(Closure {
                param: param.clone(),
                body: body.clone(),
                env: env.clone(),
            })))),
            Expr::App(f, a) => match self.eval(env, f, depth)? {
                Step::Done(func) => self.eval_arg_and_apply(func, env, a, depth),
                Step::Suspended(s) => Ok(push(
                    s,
                    Frame::EvalArg {
                        arg: a.clone(),
                        env: env.clone(),
                    },
                )),
            },
            Expr::For { var, size, body } => match self.eval(env, size, depth)? {
                Step::Done(n) => loop_request(var, body, env, n),
                Step::Suspended(s) => Ok(push(
                    s,
                    Frame::ForSize {
                        var: var.clone(),
                        body: body.clone(),
                        env: env.clone(),
                    },
                )),
            },
            Expr::Handle {
                handler,
                state,
                body,
            } => {
                let HandlerExpr {
                    op,
                    on_return,
                    on_op,
                    on_traverse,
                } = &**handler;
                let exprs: Arc<[Expr]> = Arc::from(vec![
                    on_return.clone(),
                    on_op.clone(),
                    on_traverse.clone(),
                    (**state).clone(),
                ]);
                let kind = Collect::Handle {
                    op: op.clone(),
                    body: body.clone(),
                };
                self.collect(env, kind, exprs, Vec::with_capacity(4), depth)
            }
            Expr::Perform(op) => Ok(Step::Done(Value::Perform(op.clone()))),
            Expr::Table(es) => self.collect(env, Collect::Table, es.clone(), Vec::new(), depth),
            Expr::Tuple(es) => self.collect(env, Collect::Tuple, es.clone(), Vec::new(), depth),
            Expr::If {
                cond,
                then,
                otherwise,
            } => match self.eval(env, cond, depth)? {
                Step::Done(c) => self.branch(c, then, otherwise, env, depth),
                Step::Suspended(s) => Ok(push(
                    s,
                    Frame::If {
                        then: then.clone(),
                        otherwise: otherwise.clone(),
                        env: env.clone(),
                    },
                )),
            },
            Expr::CaseEither {
                scrutinee,
                left_var,
                left,
                right_var,
                right,
            } => match self.eval(env, scrutinee, depth)? {
                Step::Done(v) => self.case(v, left_var, left, right_var, right, env, depth),
                Step::Suspended(s) => Ok(push(
                    s,
                    Frame::Case {
                        left_var: left_var.clone(),
                        left: left.clone(),
                        right_var: right_var.clone(),
                        right: right.clone(),
                        env: env.clone(),
                    },
                )),
            },
            Expr::Builtin(prim) => Ok(Step::Done(Value::Builtin(Arc::new(Partial {
                prim: *prim,
                args: Vec::new(),
            })))),
        }
    }

    fn eval_arg_and_apply(
        &mut self,
        func: Value,
        env: &Env,
        arg: &Expr,
        depth: usize,
    ) -> EvalResult<Step> {
        match self.eval(env, arg, depth)? {
            Step::Done(a) => self.apply(&func, a, depth),
            Step::Suspended(s) => Ok(push(s, Frame::ApplyFn { func })),
        }
    }

    fn collect(
        &mut self,
        env: &Env,
        kind: Collect,
        exprs: Arc<[Expr]>,
        mut done: Vec<Value>,
        depth: usize,
    ) -> EvalResult<Step> {
        while done.len() < exprs.len() {
            match self.eval(env, &exprs[done.len()], depth)? {
                Step::Done(v) => done.push(v),
                Step::Suspended(s) => {
                    return Ok(push(
                        s,
                        Frame::Collect {
                            kind,
                            exprs,
                            done,
                            env: env.clone(),
                        },
                    ))
                }
            }
        }
        match kind {
            Collect::Tuple => Ok(Step::Done(Value::tuple(done))),
            Collect::Table => Ok(Step::Done(Value::table(done))),
            Collect::Handle { op, body } => {
                let mut parts = done.into_iter();
                let mut next = || parts.next().expect("four handle parts");
                let handler = Arc::new(HandlerValue {
                    op,
                    on_return: next(),
                    on_op: next(),
                    on_traverse: next(),
                });
                let state = next();
                let body_step = self.eval(env, &body, depth + 1)?;
                self.dispatch(&handler, state, body_step, depth)
            }
        }
    }

    fn branch(
        &mut self,
        cond: Value,
        then: &Expr,
        otherwise: &Expr,
        env: &Env,
        depth: usize,
    ) -> EvalResult<Step> {
        match cond {
            Value::Bool(true) => self.eval(env, then, depth),
            Value::Bool(false) => self.eval(env, otherwise, depth),
            other => Err(RuntimeError::Type(format!(
                "if condition must be a bool, got {}",
                other.kind()
            ))),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn case(
        &mut self,
        scrutinee: Value,
        left_var: &Name,
        left: &Expr,
        right_var: &Name,
        right: &Expr,
        env: &Env,
        depth: usize,
    ) -> EvalResult<Step> {
        match scrutinee {
            Value::Left(v) => self.eval(&env.extend(left_var.clone(), (*v).clone()), left, depth),
            Value::Right(v) => {
                self.eval(&env.extend(right_var.clone(), (*v).clone()), right, depth)
            }
            other => Err(RuntimeError::Type(format!(
                "case scrutinee must be Left or Right, got {}",
                other.kind()
            ))),
        }
    }

    /// Applies a function value (closure, table, builtin, `perform op`, or
    /// resumption) to an argument.
    pub fn apply(&mut self, func: &Value, arg: Value, depth: usize) -> EvalResult<Step> {
        match func {
            Value::Closure(c) => {
                self.event(Rule::App, depth, || c.param.to_string());
                self.eval(&c.env.extend(c.param.clone(), arg), &c.body, depth)
            }
            Value::Table(items) => {
                let Value::Int(i) = arg else {
                    return Err(RuntimeError::Type(format!(
                        "table index must be an int, got {}",
                        arg.kind()
                    )));
                };
                self.event(Rule::Index, depth, || i.to_string());
                usize::try_from(i)
                    .ok()
                    .and_then(|ix| items.get(ix))
                    .cloned()
                    .map(Step::Done)
                    .ok_or(RuntimeError::IndexOutOfBounds {
                        index: i,
                        len: items.len(),
                    })
            }
            Value::Builtin(partial) => {
                let mut args = partial.args.clone();
                args.push(arg);
                if args.len() == partial.prim.arity() {
                    stdlib::call(self, partial.prim, args, depth)
                } else {
                    Ok(Step::Done(Value::Builtin(Arc::new(Partial {
                        prim: partial.prim,
                        args,
                    }))))
                }
            }
            Value::Perform(op) => Ok(Step::suspend(Request::Op {
                op: op.clone(),
                arg,
            })),
            Value::Resume(r) => self.resume_with(r, arg, depth),
            other => Err(RuntimeError::AppliedNonFunction(other.to_string())),
        }
    }

    fn resume_with(&mut self, r: &Resumption, arg: Value, depth: usize) -> EvalResult<Step> {
        match r {
            Resumption::Continue {
                handler,
                chain,
                state: None,
            } => Ok(Step::Done(Value::Resume(Arc::new(Resumption::Continue {
                handler: handler.clone(),
                chain: chain.clone(),
                state: Some(arg),
            })))),
            Resumption::Continue {
                handler,
                chain,
                state: Some(state),
            } => {
                self.event(Rule::App, depth, || "k".into());
                // The chain's innermost frame sits under the reinstalled
                // handler plus every handle frame recorded in the chain.
                let inner_depth = depth + 1 + chain.handle_frames();
                let step = self.resume(chain, arg, inner_depth)?;
                self.dispatch(handler, state.clone(), step, depth)
            }
            Resumption::Loop {
                handler,
                size,
                body,
            } => {
                self.event(Rule::App, depth, || "l".into());
                let states = match &arg {
                    Value::Table(t) if t.len() == *size => t.clone(),
                    Value::Table(t) => {
                        return Err(RuntimeError::StateTableMismatch {
                            expected: *size,
                            found: format!("table of length {}", t.len()),
                        })
                    }
                    other => {
                        return Err(RuntimeError::StateTableMismatch {
                            expected: *size,
                            found: other.kind().to_string(),
                        })
                    }
                };
                Ok(Step::suspend(Request::Loop {
                    size: *size,
                    body: Arc::new(LoopBody::Wrapped {
                        handler: handler.clone(),
                        states,
                        inner: body.clone(),
                    }),
                }))
            }
        }
    }

    /// Applies a curried function to several arguments in turn.
    pub fn apply_all(&mut self, func: &Value, args: Vec<Value>, depth: usize) -> EvalResult<Step> {
        let mut args = args.into_iter();
        let Some(first) = args.next() else {
            return Ok(Step::Done(func.clone()));
        };
        let mut step = self.apply(func, first, depth)?;
        for arg in args {
            step = self.bind(step, Frame::ApplyTo { arg }, depth)?;
        }
        Ok(step)
    }

    fn bind(&mut self, step: Step, frame: Frame, depth: usize) -> EvalResult<Step> {
        match step {
            Step::Done(v) => self.resume_frame(&frame, v, depth),
            Step::Suspended(s) => Ok(push(s, frame)),
        }
    }

    /// Runs the result of a handled body through handler `h` with state `s`.
    pub fn dispatch(
        &mut self,
        h: &Arc<HandlerValue>,
        state: Value,
        body: Step,
        depth: usize,
    ) -> EvalResult<Step> {
        match body {
            Step::Done(v) => {
                self.event(Rule::Return, depth, || h.op.to_string());
                self.apply_all(&h.on_return, vec![state, v], depth)
            }
            Step::Suspended(mut susp) => match susp.request {
                Request::Op { ref op, .. } if *op != h.op => {
                    susp.chain.push(Frame::Handle {
                        handler: h.clone(),
                        state,
                    });
                    Ok(Step::Suspended(susp))
                }
                Request::Op { op, arg } => {
                    self.event(Rule::Perform, depth, || op.to_string());
                    let k = Value::Resume(Arc::new(Resumption::Continue {
                        handler: h.clone(),
                        chain: Arc::new(susp.chain),
                        state: None,
                    }));
                    self.apply_all(&h.on_op, vec![state, arg, k], depth)
                }
                Request::Loop { size, body } => {
                    self.event(Rule::Traverse, depth, || format!("{} n={size}", h.op));
                    let l = Value::Resume(Arc::new(Resumption::Loop {
                        handler: h.clone(),
                        size,
                        body,
                    }));
                    let k = Value::Resume(Arc::new(Resumption::Continue {
                        handler: h.clone(),
                        chain: Arc::new(susp.chain),
                        state: None,
                    }));
                    let n = Value::Int(size as i64);
                    self.apply_all(&h.on_traverse, vec![n, state, l, k], depth)
                }
            },
        }
    }

    /// Feeds `value` into `chain`, innermost frame first. `depth` is the
    /// depth of the innermost frame.
    pub fn resume(&mut self, chain: &ResumeChain, value: Value, depth: usize) -> EvalResult<Step> {
        let mut depth = depth;
        let mut step = Step::Done(value);
        for frame in &chain.frames {
            step = match frame {
                Frame::Handle { handler, state } => {
                    depth -= 1;
                    self.dispatch(handler, state.clone(), step, depth)?
                }
                _ => self.bind(step, frame.clone(), depth)?,
            };
        }
        Ok(step)
    }

    fn resume_frame(&mut self, frame: &Frame, v: Value, depth: usize) -> EvalResult<Step> {
        match frame {
            Frame::EvalArg { arg, env } => self.eval_arg_and_apply(v, env, arg, depth),
            Frame::ApplyFn { func } => self.apply(func, v, depth),
            Frame::ApplyTo { arg } => self.apply(&v, arg.clone(), depth),
            Frame::ForSize { var, body, env } => loop_request(var, body, env, v),
            Frame::Collect {
                kind,
                exprs,
                done,
                env,
            } => {
                let mut done = done.clone();
                done.push(v);
                self.collect(env, kind.clone(), exprs.clone(), done, depth)
            }
            Frame::If {
                then,
                otherwise,
                env,
            } => self.branch(v, then, otherwise, env, depth),
            Frame::Case {
                left_var,
                left,
                right_var,
                right,
                env,
            } => self.case(v, left_var, left, right_var, right, env, depth),
            Frame::Handle { handler, state } => {
                self.dispatch(handler, state.clone(), Step::Done(v), depth)
            }
            Frame::ReduceRight {
                func,
                items,
                mid,
                hi,
            } => {
                let right = self.reduce_range(func, items, *mid, *hi, depth)?;
                self.bind(
                    right,
                    Frame::ReduceCombine {
                        func: func.clone(),
                        left: v,
                    },
                    depth,
                )
            }
            Frame::ReduceCombine { func, left } => {
                self.apply_all(func, vec![left.clone(), v], depth)
            }
        }
    }

    /// Balanced-tree reduction of `items[lo..hi]`; the left subtree holds
    /// the first ⌈len/2⌉ elements.
    pub(crate) fn reduce_range(
        &mut self,
        func: &Value,
        items: &Arc<[Value]>,
        lo: usize,
        hi: usize,
        depth: usize,
    ) -> EvalResult<Step> {
        debug_assert!(hi > lo);
        if hi - lo == 1 {
            return Ok(Step::Done(items[lo].clone()));
        }
        let mid = lo + (hi - lo).div_ceil(2);
        let left = self.reduce_range(func, items, lo, mid, depth)?;
        self.bind(
            left,
            Frame::ReduceRight {
                func: func.clone(),
                items: items.clone(),
                mid,
                hi,
            },
            depth,
        )
    }

    /// Runs iteration `index` of a loop body.
    pub fn run_body(&mut self, body: &LoopBody, index: usize, depth: usize) -> EvalResult<Step> {
        match body {
            LoopBody::Source { var, body, env } => self.eval(
                &env.extend(var.clone(), Value::Int(index as i64)),
                body,
                depth,
            ),
            LoopBody::Wrapped {
                handler,
                states,
                inner,
            } => {
                self.event(Rule::Index, depth, || index.to_string());
                let state = states[index].clone();
                let step = self.run_body(inner, index, depth + 1)?;
                self.dispatch(handler, state, step, depth)
            }
        }
    }
}

fn loop_request(var: &Name, body: &Arc<Expr>, env: &Env, size: Value) -> EvalResult<Step> {
    let size = match size {
        Value::Int(n) if n >= 0 => n as usize,
        other => return Err(RuntimeError::BadLoopSize(other.to_string())),
    };
    Ok(Step::suspend(Request::Loop {
        size,
        body: Arc::new(LoopBody::Source {
            var: var.clone(),
            body: body.clone(),
            env: env.clone(),
        }),
    }))
}

/// Helper for builtins that need to call back into the machine.
pub(crate) fn reduce(
    m: &mut Machine,
    func: &Value,
    items: &Arc<[Value]>,
    depth: usize,
) -> EvalResult<Step> {
    if items.is_empty() {
        return Err(RuntimeError::ReduceEmpty);
    }
    m.reduce_range(func, items, 0, items.len(), depth)
}
