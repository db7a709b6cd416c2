//! Value-based analysis: one execution partitions a space of alternative
//! expressions for a single marked occurrence.

use std::collections::BTreeSet;

use crate::lang::{
    eval_expr, exec_traced, ExprPath, Program, RunOutcome, RuntimeErrorKind, State, Tracer, Value,
};
use crate::synth::{project_value, ExprSpace};

use super::AnalysisEvent;

/// Configuration of a value-analysis run: the one marked expression
/// occurrence and the candidate substitutions for it. The expression
/// currently installed at the marked occurrence must be a member of the
/// candidate set.
#[derive(Debug, Clone)]
pub struct ValueAnalysisConfig {
    pub marked: ExprPath,
    pub candidates: ExprSpace,
    pub log_events: bool,
}

impl ValueAnalysisConfig {
    pub fn new(marked: ExprPath, candidates: ExprSpace) -> ValueAnalysisConfig {
        ValueAnalysisConfig { marked, candidates, log_events: false }
    }
}

/// The (state, value) pairs observed at the marked occurrence, in
/// execution order. Folding the value projection over the trace reproduces
/// the surviving set, as long as the run did not fault inside the marked
/// expression itself.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValueTrace(pub Vec<(State, Value)>);

impl ValueTrace {
    /// Replays the trace as a chain of projections over `space`.
    pub fn replay(&self, space: &ExprSpace) -> ExprSpace {
        let mut cur = space.clone();
        for (sigma, n) in &self.0 {
            cur = project_value(&cur, sigma, *n);
        }
        cur
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Result of a value-analysis run.
#[derive(Debug, Clone)]
pub struct ValueRun {
    /// Outcome of the execution — identical to what plain execution of the
    /// same program would produce.
    pub outcome: RunOutcome,
    /// Candidates indistinguishable from the installed expression on this
    /// run. Always contains the installed expression.
    pub surviving: ExprSpace,
    pub trace: ValueTrace,
    /// Whether the marked occurrence was evaluated at all.
    pub marked_reached: bool,
    pub events: Vec<AnalysisEvent>,
}

struct ValueTracer<'a> {
    marked: &'a ExprPath,
    surviving: ExprSpace,
    trace: ValueTrace,
    reached: bool,
    involved: BTreeSet<String>,
    events: Option<Vec<AnalysisEvent>>,
}

impl Tracer for ValueTracer<'_> {
    fn marked_path(&self) -> Option<&ExprPath> {
        Some(self.marked)
    }

    fn on_marked(&mut self, sigma: &State, result: &Result<Value, RuntimeErrorKind>) {
        self.reached = true;
        match result {
            Ok(n) => {
                self.trace.0.push((sigma.clone(), *n));
                self.surviving = project_value(&self.surviving, sigma, *n);
            }
            Err(_) => {
                // The installed expression faulted mid-evaluation. Candidates
                // that evaluate cleanly here would diverge from this run, so
                // only the ones that fault under the same state stay.
                self.surviving = self.surviving.filtered(|e| eval_expr(e, sigma).is_err());
            }
        }
        if let Some(events) = &mut self.events {
            events.push(AnalysisEvent {
                kind: if result.is_ok() { "project" } else { "project-fault" },
                at: self.marked.to_string(),
                state: AnalysisEvent::snapshot(sigma, &self.involved),
                survivors: self.surviving.len(),
            });
        }
    }
}

/// Runs `p` exactly as plain execution would, recording the value of the
/// marked occurrence each time it is evaluated and projecting the candidate
/// set on each observation. On a faulting run the partial surviving set up
/// to the fault is returned together with the failing outcome.
pub fn exec_value(p: &Program, input: &State, cfg: &ValueAnalysisConfig, fuel: u64) -> ValueRun {
    let installed = p
        .expr_at(&cfg.marked)
        .unwrap_or_else(|| panic!("marked path {} does not exist in the program", cfg.marked));
    assert!(
        cfg.candidates.contains(installed),
        "installed expression `{installed}` must be a member of the candidate set"
    );

    let mut involved = cfg.candidates.vars();
    installed.collect_vars(&mut involved);
    let mut tracer = ValueTracer {
        marked: &cfg.marked,
        surviving: cfg.candidates.clone(),
        trace: ValueTrace::default(),
        reached: false,
        involved,
        events: cfg.log_events.then(Vec::new),
    };
    let outcome = exec_traced(p, input, fuel, &mut tracer);
    ValueRun {
        outcome,
        surviving: tracer.surviving,
        trace: tracer.trace,
        marked_reached: tracer.reached,
        events: tracer.events.unwrap_or_default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{exec, parse_expr, parse_program, LocationId, Ty};
    use crate::synth::ExprSpace;

    fn state(pairs: &[(&str, i64)]) -> State {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    fn bool_space(texts: &[&str]) -> ExprSpace {
        ExprSpace::from_exprs(Ty::Bool, texts.iter().map(|t| parse_expr(t).unwrap())).unwrap()
    }

    const LOOP_WITH: &str = "while i > 0 do if COND then c := c + 1 else skip fi ; i := i - 1 od";

    fn loop_program(cond: &str) -> Program {
        parse_program(&LOOP_WITH.replace("COND", cond)).unwrap()
    }

    #[test]
    fn one_run_pairs_the_two_always_true_conditions() {
        let p = loop_program("i >= 0");
        let cfg = ValueAnalysisConfig::new(
            ExprPath::slot(LocationId(2)),
            bool_space(&["i >= 0", "c >= 0", "i mod 2 = 1", "i mod 2 = 0", "i > 2"]),
        );
        let run = exec_value(&p, &state(&[("i", 4), ("c", 0)]), &cfg, 10_000);
        let names: Vec<String> = run.surviving.iter().map(|e| e.to_string()).collect();
        assert_eq!(names, vec!["c >= 0", "i >= 0"]);
        assert_eq!(run.trace.len(), 4);
        assert!(run.marked_reached);
        assert_eq!(run.surviving, run.trace.replay(&cfg.candidates));
    }

    #[test]
    fn singleton_candidate_set_is_reflexive() {
        let p = loop_program("i > 2");
        let cfg = ValueAnalysisConfig::new(ExprPath::slot(LocationId(2)), bool_space(&["i > 2"]));
        let run = exec_value(&p, &state(&[("i", 4), ("c", 0)]), &cfg, 10_000);
        assert_eq!(run.surviving.len(), 1);
    }

    #[test]
    fn analysis_is_transparent() {
        let p = loop_program("i mod 2 = 1");
        let input = state(&[("i", 4), ("c", 0)]);
        let cfg = ValueAnalysisConfig::new(
            ExprPath::slot(LocationId(2)),
            bool_space(&["i mod 2 = 1", "i > 2"]),
        );
        let run = exec_value(&p, &input, &cfg, 10_000);
        assert_eq!(run.outcome, exec(&p, &input, 10_000));
    }

    #[test]
    fn faulting_installed_expression_keeps_only_cofaulting_candidates() {
        // c = 0 initially, so `i mod c` faults on the first observation
        let p = loop_program("i mod c = 0");
        let cfg = ValueAnalysisConfig::new(
            ExprPath::slot(LocationId(2)),
            bool_space(&["i mod c = 0", "c mod c = 1", "i >= 0"]),
        );
        let run = exec_value(&p, &state(&[("i", 4), ("c", 0)]), &cfg, 10_000);
        assert_eq!(run.outcome, RunOutcome::RuntimeError(RuntimeErrorKind::ModByZero));
        let names: Vec<String> = run.surviving.iter().map(|e| e.to_string()).collect();
        assert_eq!(names, vec!["c mod c = 1", "i mod c = 0"]);
        assert!(run.trace.is_empty());
        assert!(run.marked_reached);
    }

    #[test]
    fn unreached_marker_leaves_the_space_whole() {
        let p = parse_program("if x > 0 then y := 1 else y := y - 1 fi").unwrap();
        // marked occurrence is the rhs of the never-taken else branch
        let cfg = ValueAnalysisConfig::new(
            ExprPath::slot(LocationId(2)),
            ExprSpace::from_exprs(
                Ty::Int,
                ["y - 1", "y + 1", "0"].iter().map(|t| parse_expr(t).unwrap()),
            )
            .unwrap(),
        );
        let run = exec_value(&p, &state(&[("x", 3), ("y", 0)]), &cfg, 1_000);
        assert!(!run.marked_reached);
        assert_eq!(run.surviving.len(), 3);
    }

    #[test]
    fn refinement_marker_observes_the_appended_conjunct() {
        // marked path points at the right operand of the `and`
        let p = parse_program("if x > 0 and x < 9 then y := 1 else skip fi").unwrap();
        let cfg = ValueAnalysisConfig::new(
            ExprPath { loc: LocationId(0), steps: vec![1] },
            bool_space(&["x < 9", "x != 5", "false"]),
        );
        let run = exec_value(&p, &state(&[("x", 3), ("y", 0)]), &cfg, 1_000);
        let names: Vec<String> = run.surviving.iter().map(|e| e.to_string()).collect();
        assert_eq!(names, vec!["x != 5", "x < 9"]);
        assert_eq!(run.trace.len(), 1);
    }
}
