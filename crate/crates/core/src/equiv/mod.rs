//! Test-equivalence analyses.
//!
//! A single instrumented execution of one candidate computes the whole set
//! of candidates that are indistinguishable from it on the executed test:
//!
//! * [`exec_value`] handles spaces of programs that differ in one marked
//!   expression, by projecting the candidate set on every observed value of
//!   the marked occurrence;
//! * [`exec_deps`] handles insertions of one fixed assignment at different
//!   locations, by tracking dependency windows — maximal execution segments
//!   with no interfering access to the assignment's variables;
//! * [`exec_composed`] combines both: insertions of a pool of right-hand
//!   sides at different locations, projected by value inside each window.

mod deps;
mod value;

use std::fmt;

use crate::lang::State;

pub use deps::{exec_composed, exec_deps, DepsAnalysisConfig, DepsRun};
pub use value::{exec_value, ValueAnalysisConfig, ValueRun, ValueTrace};

/// One analysis event, recorded when event logging is enabled. The CLI
/// prints these behind its `--trace` flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisEvent {
    /// What happened: a value observation, a window flush, and so on.
    pub kind: &'static str,
    /// Location or expression path the event is anchored to.
    pub at: String,
    /// Snapshot of the variables involved in the analysis.
    pub state: Vec<(String, i64)>,
    /// Number of candidates still alive after the event.
    pub survivors: usize,
}

impl AnalysisEvent {
    pub(crate) fn snapshot(sigma: &State, involved: &std::collections::BTreeSet<String>) -> Vec<(String, i64)> {
        involved
            .iter()
            .filter_map(|v| sigma.get(v).map(|n| (v.clone(), n)))
            .collect()
    }
}

impl fmt::Display for AnalysisEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {} [", self.kind, self.at)?;
        for (i, (k, v)) in self.state.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, "] survivors={}", self.survivors)
    }
}
