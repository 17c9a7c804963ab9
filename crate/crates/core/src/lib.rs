//! An interpreter for the untyped lambda calculus with parallel algebraic
//! effect handlers.
//!
//! Programs are written in a small surface language ([`parser`]), desugared
//! to core expressions ([`syntax::Expr`]) and evaluated by the [`machine`].
//! Effects are interpreted by user-written handlers with `return`, operation
//! and `traverse` clauses; a `for` loop that has been traversed by every
//! enclosing handler runs its iterations in parallel ([`runtime`]).
//!
//! ```
//! use lambdap::{compile, run_program, RunConfig};
//!
//! let program = compile("runAmb (\\_. perform amb [1, 2] + perform amb [10, 20])", true).unwrap();
//! let out = run_program(&program, &RunConfig::default());
//! assert_eq!(out.value.unwrap().to_string(), "[11, 21, 12, 22]");
//! ```

pub mod error;
pub mod machine;
pub mod parser;
pub mod runtime;
pub mod stdlib;
pub mod syntax;
pub mod trace;

pub use error::{ParseError, Pos, RuntimeError};
pub use parser::{compile, parse};
pub use runtime::{run_program, Mode, RunConfig, RunOutcome};
pub use syntax::{print_value, value_eq, Env, Expr, Value};
pub use trace::{merge_traces, Rule, TraceEvent};
