//! Top-level driver.
//!
//! A loop request that escapes every handler frame has had all of its
//! effects pushed inside its iterations, so the iterations are independent
//! and are run concurrently. Their values are assembled in index order and
//! the captured context resumes with the table. Each iteration keeps its own
//! trace buffer; buffers are merged in index order after the join, so the
//! observable output does not depend on scheduling.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::RuntimeError;
use crate::machine::{LoopBody, Machine, Request, Step};
use crate::syntax::{Env, Expr, Value};
use crate::trace::{merge_traces, Rule, TraceEvent};

/// Evaluation threads recurse deeply on long sequences.
const STACK_SIZE: usize = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Handler-free loops run their iterations on the worker pool.
    #[default]
    Parallel,
    /// Iterations run one after another in index order on a single thread.
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub workers: usize,
    pub trace: bool,
    pub mode: Mode,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            trace: false,
            mode: Mode::Parallel,
        }
    }
}

impl RunConfig {
    pub fn sequential() -> RunConfig {
        RunConfig {
            workers: 1,
            trace: false,
            mode: Mode::Sequential,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> RunConfig {
        self.workers = workers;
        self
    }

    pub fn with_trace(mut self, trace: bool) -> RunConfig {
        self.trace = trace;
        self
    }

    fn concurrent(&self) -> bool {
        self.mode == Mode::Parallel && self.workers > 1
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub value: Result<Value, RuntimeError>,
    /// Empty unless tracing was enabled. On failure, holds the events up to
    /// the failure (every iteration of a failed parallel region included).
    pub trace: Vec<TraceEvent>,
}

/// Evaluates a closed program to completion.
///
/// # Panics
///
/// Panics if `cfg.workers` is zero.
pub fn run_program(expr: &Expr, cfg: &RunConfig) -> RunOutcome {
    assert!(cfg.workers >= 1, "workers must be positive");
    let driver = Driver { cfg: cfg.clone() };
    let expr = expr.clone();
    let job = move || {
        let mut m = Machine::new(driver.cfg.trace);
        let value = m
            .eval(&Env::new(), &expr, 0)
            .and_then(|step| driver.drive(&mut m, step));
        RunOutcome {
            value,
            trace: m.take_trace(),
        }
    };
    if cfg.concurrent() {
        pool(cfg.workers).install(job)
    } else {
        std::thread::Builder::new()
            .name("lambdap-eval".into())
            .stack_size(STACK_SIZE)
            .spawn(job)
            .expect("spawn evaluation thread")
            .join()
            .unwrap_or_else(|panic| std::panic::resume_unwind(panic))
    }
}

/// Worker pools are shared across runs with the same worker count; nested
/// parallel regions draw from the same pool.
fn pool(workers: usize) -> Arc<ThreadPool> {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<ThreadPool>>>> = OnceLock::new();
    let mut pools = POOLS
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    pools
        .entry(workers)
        .or_insert_with(|| {
            Arc::new(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .stack_size(STACK_SIZE)
                    .thread_name(|i| format!("lambdap-worker-{i}"))
                    .build()
                    .expect("build worker pool"),
            )
        })
        .clone()
}

struct Driver {
    cfg: RunConfig,
}

impl Driver {
    fn drive(&self, m: &mut Machine, mut step: Step) -> Result<Value, RuntimeError> {
        loop {
            let susp = match step {
                Step::Done(v) => return Ok(v),
                Step::Suspended(s) => s,
            };
            match susp.request {
                Request::Op { op, .. } => {
                    return Err(RuntimeError::UnhandledOperation(op.to_string()))
                }
                Request::Loop { size, body } => {
                    m.event(Rule::Parallel, 0, || format!("n={size}"));
                    let table = self.iterations(m, size, &body)?;
                    // Nothing enclosing a top-level request is a handler, so
                    // the chain resumes at depth zero.
                    step = m.resume(&susp.chain, table, 0)?;
                }
            }
        }
    }

    fn iterations(
        &self,
        m: &mut Machine,
        size: usize,
        body: &Arc<LoopBody>,
    ) -> Result<Value, RuntimeError> {
        if size == 0 {
            return Ok(Value::table(Vec::new()));
        }
        let tracing = m.tracing();
        let run_one = |i: usize| {
            let mut sub = Machine::new(tracing);
            let value = sub
                .run_body(body, i, 0)
                .and_then(|step| self.drive(&mut sub, step));
            (value, sub.take_trace())
        };
        let results: Vec<_> = if self.cfg.concurrent() {
            (0..size).into_par_iter().map(run_one).collect()
        } else {
            (0..size).map(run_one).collect()
        };
        let mut values = Vec::with_capacity(size);
        let mut traces = Vec::with_capacity(if tracing { size } else { 0 });
        let mut first_error = None;
        for (value, trace) in results {
            if tracing {
                traces.push(trace);
            }
            match value {
                Ok(v) => values.push(v),
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        m.extend_trace(merge_traces(traces));
        match first_error {
            Some(e) => Err(e),
            None => Ok(Value::table(values)),
        }
    }
}
