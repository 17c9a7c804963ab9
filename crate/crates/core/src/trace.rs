//! Reduction trace events.

use std::fmt;

/// The reduction rule that fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    App,
    Index,
    Return,
    Perform,
    Traverse,
    Parallel,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::App => "app",
            Rule::Index => "index",
            Rule::Return => "return",
            Rule::Perform => "perform",
            Rule::Traverse => "traverse",
            Rule::Parallel => "parallel",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub rule: Rule,
    /// Number of handle frames enclosing the redex.
    pub depth: usize,
    /// Iteration indices of the enclosing parallel regions, outermost first.
    pub path: Vec<usize>,
    pub detail: String,
}

impl TraceEvent {
    pub fn is_top_level(&self) -> bool {
        self.path.is_empty()
    }
}

/// `<iterPath>\t<rule>\t<depth>\t<detail>`, with the path dot-joined or `-`.
impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str("-")?;
        } else {
            for (i, ix) in self.path.iter().enumerate() {
                if i > 0 {
                    f.write_str(".")?;
                }
                write!(f, "{ix}")?;
            }
        }
        write!(f, "\t{}\t{}\t{}", self.rule, self.depth, self.detail)
    }
}

/// Concatenates per-iteration traces in index order, prefixing each event's
/// path with its iteration index.
pub fn merge_traces(per_iteration: Vec<Vec<TraceEvent>>) -> Vec<TraceEvent> {
    per_iteration
        .into_iter()
        .enumerate()
        .flat_map(|(i, events)| {
            events.into_iter().map(move |mut e| {
                e.path.insert(0, i);
                e
            })
        })
        .collect()
}
