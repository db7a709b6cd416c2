//! Cost-ordered search with on-the-fly test-equivalence partitioning.
//!
//! The loop picks the cheapest unexplored candidate, discards it without
//! execution if it already sits in a failing class of any test, and
//! otherwise evaluates it test by test: a test whose passing classes
//! already contain the candidate is skipped, every other test costs one
//! instrumented execution that registers a whole new class. A candidate
//! that passes (or is covered by passing classes for) every test is a
//! repair; the first one found is optimal under (cost, serialization)
//! because exploration follows exactly that order.
//!
//! [`naive_explore`] runs the same loop without classes — every candidate
//! pays one plain execution per test until its first failure — and doubles
//! as the correctness oracle and the benchmark baseline.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::equiv::{exec_composed, exec_value, AnalysisEvent, DepsAnalysisConfig, ValueAnalysisConfig};
use crate::lang::{
    eval_expr, exec_traced, run_test, LocationId, Program, RunOutcome, State, Stmt, Test, Tracer,
    Value, Verdict,
};
use crate::space::{
    apply_patch_anchored, AppliedAnchor, ApplyError, Cost, CostFn, Patch, PatchGroup, PatchSpace,
};

use super::class::{ClassMembers, EquivClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Stop after the first (minimum-cost) repair.
    First,
    /// Explore the entire space and emit every plausible patch.
    Full,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::First => write!(f, "first"),
            Mode::Full => write!(f, "full"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Partition,
    Naive,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Partition => write!(f, "partition"),
            Strategy::Naive => write!(f, "naive"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RepairOptions {
    pub mode: Mode,
    pub fuel: u64,
    /// Collect per-run analysis events (the CLI's `--trace`).
    pub trace: bool,
}

impl Default for RepairOptions {
    fn default() -> RepairOptions {
        RepairOptions { mode: Mode::First, fuel: 100_000, trace: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepairError {
    #[error("no failing test: the program already passes the whole suite")]
    NoFailingTest,
    #[error(transparent)]
    Apply(#[from] ApplyError),
}

/// How one candidate was dealt with, for accounting and debugging.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Disposition {
    /// Discarded without execution: it belongs to a failing class.
    SkippedFailingClass,
    /// Went through the per-test loop.
    Tested { steps: Vec<(String, StepKind)>, plausible: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepKind {
    SkippedPassing,
    Executed(Verdict),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateRecord {
    pub patch: Patch,
    pub disposition: Disposition,
}

#[derive(Debug, Clone, Default)]
pub struct TestStats {
    pub executions: u64,
    pub classes_registered: u64,
    pub skipped_passing: u64,
}

#[derive(Debug, Clone, Default)]
pub struct SessionStats {
    pub candidates_total: usize,
    /// Candidates whose full-suite verdict the session determined and whose
    /// modification is executed by every originally failing test.
    pub candidates_explored: usize,
    pub test_executions: u64,
    pub per_test: BTreeMap<String, TestStats>,
    pub skipped_failing_candidates: u64,
    pub plausible_count: usize,
    pub first_repair_cost: Option<Cost>,
    pub wall: Duration,
}

impl SessionStats {
    /// Explored candidates per test execution; zero on an empty run.
    pub fn exploration_speed(&self) -> f64 {
        if self.test_executions == 0 {
            0.0
        } else {
            self.candidates_explored as f64 / self.test_executions as f64
        }
    }
}

/// Events of one analysis run, kept when tracing is enabled.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub patch: String,
    pub test: String,
    pub events: Vec<AnalysisEvent>,
}

/// Everything a finished exploration leaves behind.
#[derive(Debug, Clone)]
pub struct RepairSession {
    pub strategy: Strategy,
    pub mode: Mode,
    /// Tests in exploration order: originally failing ones first.
    pub test_order: Vec<Test>,
    pub originally_failing: BTreeSet<String>,
    pub passing: BTreeMap<String, Vec<EquivClass>>,
    pub failing: BTreeMap<String, Vec<EquivClass>>,
    /// Plausible patches in emission order, ascending (cost, serialization).
    pub repairs: Vec<Patch>,
    pub records: Vec<CandidateRecord>,
    pub traces: Vec<TraceRecord>,
    pub stats: SessionStats,
}

impl RepairSession {
    fn new(strategy: Strategy, mode: Mode, test_order: Vec<Test>, failing: BTreeSet<String>) -> RepairSession {
        let passing = test_order.iter().map(|t| (t.name.clone(), Vec::new())).collect();
        let failing_map = test_order.iter().map(|t| (t.name.clone(), Vec::new())).collect();
        RepairSession {
            strategy,
            mode,
            test_order,
            originally_failing: failing,
            passing,
            failing: failing_map,
            repairs: Vec::new(),
            records: Vec::new(),
            traces: Vec::new(),
            stats: SessionStats::default(),
        }
    }

    pub fn in_any_failing_class(&self, patch: &Patch) -> bool {
        self.failing.values().flatten().any(|c| c.contains(patch))
    }

    pub fn in_passing_class(&self, test: &str, patch: &Patch) -> bool {
        self.passing.get(test).is_some_and(|cs| cs.iter().any(|c| c.contains(patch)))
    }

    /// Whether the session knows the candidate's full-suite verdict.
    pub fn verdict_known(&self, patch: &Patch) -> bool {
        self.in_any_failing_class(patch)
            || self.test_order.iter().all(|t| self.in_passing_class(&t.name, patch))
    }
}

/// Verdict of an already-completed execution outcome against a test
/// assertion.
fn verdict_of(outcome: &RunOutcome, test: &Test) -> Verdict {
    match outcome {
        RunOutcome::Final(sigma) => match eval_expr(&test.assertion, sigma) {
            Ok(Value::Bool(true)) => Verdict::Pass,
            _ => Verdict::Fail,
        },
        _ => Verdict::Fail,
    }
}

/// Result of one class evaluation.
#[derive(Debug, Clone)]
pub struct ClassEval {
    pub verdict: Verdict,
    pub class: EquivClass,
    pub events: Vec<AnalysisEvent>,
}

/// Evaluates a replacement, refinement or guard patch on one test with the
/// value analysis: a single execution whose class covers every group member
/// observing the same value sequence.
pub fn eval_value_class(
    base: &Program,
    patch: &Patch,
    test: &Test,
    group: &PatchGroup,
    fuel: u64,
    log_events: bool,
) -> Result<ClassEval, ApplyError> {
    debug_assert!(group.contains(patch), "patch must belong to the group");
    let (patched, anchor) = apply_patch_anchored(base, patch)?;
    let AppliedAnchor::Marked(marked) = anchor else {
        panic!("value analysis applies to replacement, refinement and guard patches only");
    };
    let mut cfg = ValueAnalysisConfig::new(marked, group.space.clone());
    cfg.log_events = log_events;
    let run = exec_value(&patched, &test.input, &cfg, fuel);
    let verdict = verdict_of(&run.outcome, test);
    let class = EquivClass {
        test: test.name.clone(),
        verdict,
        members: ClassMembers::Value { key: group.key.clone(), exprs: run.surviving.to_set() },
    };
    debug_assert!(class.contains(patch), "executed candidate must be in its own class");
    Ok(ClassEval { verdict, class, events: run.events })
}

/// Evaluates an assignment-insertion patch on one test with the composed
/// analysis: the class spans the group's insertion sites and right-hand
/// sides that are interchangeable with the executed pair.
pub fn eval_assign_class(
    base: &Program,
    patch: &Patch,
    test: &Test,
    group: &PatchGroup,
    fuel: u64,
    log_events: bool,
) -> Result<ClassEval, ApplyError> {
    debug_assert!(group.contains(patch), "patch must belong to the group");
    let Patch::InsertAssign { loc, var, .. } = patch else {
        panic!("dependency analysis applies to assignment insertions only");
    };
    let (patched, _) = apply_patch_anchored(base, patch)?;
    let mut cfg = DepsAnalysisConfig::new(
        *loc,
        var.clone(),
        group.space.clone(),
        group.locs.iter().copied().collect(),
    );
    cfg.log_events = log_events;
    let run = exec_composed(&patched, &test.input, &cfg, fuel);
    let verdict = verdict_of(&run.outcome, test);
    let by_loc = run
        .surviving
        .iter()
        .filter(|(_, space)| !space.is_empty())
        .map(|(&l, space)| (l, space.to_set()))
        .collect();
    let class = EquivClass {
        test: test.name.clone(),
        verdict,
        members: ClassMembers::Assign { var: var.clone(), by_loc },
    };
    debug_assert!(class.contains(patch), "executed candidate must be in its own class");
    Ok(ClassEval { verdict, class, events: run.events })
}

struct CoverageTracer {
    entered: BTreeSet<LocationId>,
}

impl Tracer for CoverageTracer {
    fn on_stmt_enter(&mut self, stmt: &Stmt, _sigma: &State) {
        self.entered.insert(stmt.loc);
    }
}

struct Prepared {
    test_order: Vec<Test>,
    originally_failing: BTreeSet<String>,
    /// Base-run statement coverage per originally failing test.
    coverage: BTreeMap<String, BTreeSet<LocationId>>,
}

/// Runs the base program on every test once: establishes the failing set
/// (the precondition), the failing-first test order, and the coverage used
/// by the explored-candidates metric. These runs are not counted as
/// exploration executions by either strategy.
fn prepare(p: &Program, tests: &[Test], fuel: u64) -> Result<Prepared, RepairError> {
    let mut failing = BTreeSet::new();
    let mut coverage = BTreeMap::new();
    for t in tests {
        let mut tracer = CoverageTracer { entered: BTreeSet::new() };
        let outcome = exec_traced(p, &t.input, fuel, &mut tracer);
        if verdict_of(&outcome, t) == Verdict::Fail {
            failing.insert(t.name.clone());
            coverage.insert(t.name.clone(), tracer.entered);
        }
    }
    if failing.is_empty() {
        return Err(RepairError::NoFailingTest);
    }
    let mut test_order: Vec<Test> = tests.iter().filter(|t| failing.contains(&t.name)).cloned().collect();
    test_order.extend(tests.iter().filter(|t| !failing.contains(&t.name)).cloned());
    Ok(Prepared { test_order, originally_failing: failing, coverage })
}

fn sorted_candidates(space: &PatchSpace, cost_fn: &CostFn) -> Vec<(usize, Patch)> {
    let mut all: Vec<(usize, Patch)> = space.iter_patches().collect();
    all.sort_by_cached_key(|(_, p)| cost_fn.key(p, &space.base));
    all
}

/// A candidate's modification is executed by a test iff the base run of
/// that test enters the anchor statement: the code before the first visit
/// of a single-site patch is unmodified, so first reachability coincides
/// with the base program's.
fn covered_by_all_failing(patch: &Patch, prep: &Prepared) -> bool {
    prep.originally_failing
        .iter()
        .all(|t| prep.coverage.get(t).is_some_and(|locs| locs.contains(&patch.anchor_loc())))
}

fn finalize(
    session: &mut RepairSession,
    space: &PatchSpace,
    prep: &Prepared,
    cost_fn: &CostFn,
    known: impl Fn(&RepairSession, &Patch) -> bool,
    started: Instant,
) {
    session.stats.candidates_total = space.total();
    session.stats.plausible_count = session.repairs.len();
    session.stats.first_repair_cost =
        session.repairs.first().map(|p| cost_fn.cost(p, &space.base));
    session.stats.candidates_explored = space
        .iter_patches()
        .filter(|(_, p)| covered_by_all_failing(p, prep) && known(session, p))
        .count();
    session.stats.wall = started.elapsed();
}

/// Cost-ordered exploration with on-the-fly partitioning. Returns the
/// plausible patches in emission order together with the full session.
pub fn repair(
    p: &Program,
    tests: &[Test],
    space: &PatchSpace,
    cost_fn: &CostFn,
    opts: &RepairOptions,
) -> Result<RepairSession, RepairError> {
    let started = Instant::now();
    let prep = prepare(p, tests, opts.fuel)?;
    let mut session = RepairSession::new(
        Strategy::Partition,
        opts.mode,
        prep.test_order.clone(),
        prep.originally_failing.clone(),
    );

    'candidates: for (gidx, patch) in sorted_candidates(space, cost_fn) {
        if session.in_any_failing_class(&patch) {
            session.stats.skipped_failing_candidates += 1;
            session
                .records
                .push(CandidateRecord { patch, disposition: Disposition::SkippedFailingClass });
            continue;
        }
        let group = &space.groups[gidx];
        let mut steps = Vec::new();
        let mut failed = false;
        for test in &session.test_order.clone() {
            if session.in_passing_class(&test.name, &patch) {
                session.stats.per_test.entry(test.name.clone()).or_default().skipped_passing += 1;
                steps.push((test.name.clone(), StepKind::SkippedPassing));
                continue;
            }
            let eval = match &patch {
                Patch::InsertAssign { .. } => {
                    eval_assign_class(p, &patch, test, group, opts.fuel, opts.trace)?
                }
                _ => eval_value_class(p, &patch, test, group, opts.fuel, opts.trace)?,
            };
            session.stats.test_executions += 1;
            let per_test = session.stats.per_test.entry(test.name.clone()).or_default();
            per_test.executions += 1;
            per_test.classes_registered += 1;
            if opts.trace {
                session.traces.push(TraceRecord {
                    patch: patch.serialize(),
                    test: test.name.clone(),
                    events: eval.events.clone(),
                });
            }
            let registry = match eval.verdict {
                Verdict::Pass => session.passing.get_mut(&test.name).unwrap(),
                Verdict::Fail => session.failing.get_mut(&test.name).unwrap(),
            };
            registry.push(eval.class);
            steps.push((test.name.clone(), StepKind::Executed(eval.verdict)));
            if eval.verdict == Verdict::Fail {
                failed = true;
                break;
            }
        }
        let plausible = !failed;
        if plausible {
            session.repairs.push(patch.clone());
        }
        session
            .records
            .push(CandidateRecord { patch, disposition: Disposition::Tested { steps, plausible } });
        if plausible && opts.mode == Mode::First {
            break 'candidates;
        }
    }

    finalize(
        &mut session,
        space,
        &prep,
        cost_fn,
        |s, patch| s.verdict_known(patch),
        started,
    );
    Ok(session)
}

/// Plain enumeration without partitioning: every candidate is executed
/// individually on each test until its first failure. Same repairs
/// contract as [`repair`]; serves as the oracle and the baseline.
pub fn naive_explore(
    p: &Program,
    tests: &[Test],
    space: &PatchSpace,
    cost_fn: &CostFn,
    opts: &RepairOptions,
) -> Result<RepairSession, RepairError> {
    let started = Instant::now();
    let prep = prepare(p, tests, opts.fuel)?;
    let mut session = RepairSession::new(
        Strategy::Naive,
        opts.mode,
        prep.test_order.clone(),
        prep.originally_failing.clone(),
    );

    let mut known: BTreeSet<String> = BTreeSet::new();
    'candidates: for (_, patch) in sorted_candidates(space, cost_fn) {
        let patched = apply_patch_anchored(p, &patch)?.0;
        let mut steps = Vec::new();
        let mut failed = false;
        for test in &session.test_order {
            let verdict = run_test(&patched, test, opts.fuel);
            session.stats.test_executions += 1;
            session.stats.per_test.entry(test.name.clone()).or_default().executions += 1;
            steps.push((test.name.clone(), StepKind::Executed(verdict)));
            if verdict == Verdict::Fail {
                failed = true;
                break;
            }
        }
        let plausible = !failed;
        known.insert(patch.serialize());
        if plausible {
            session.repairs.push(patch.clone());
        }
        session
            .records
            .push(CandidateRecord { patch, disposition: Disposition::Tested { steps, plausible } });
        if plausible && opts.mode == Mode::First {
            break 'candidates;
        }
    }

    finalize(
        &mut session,
        space,
        &prep,
        cost_fn,
        |_, patch| known.contains(&patch.serialize()),
        started,
    );
    Ok(session)
}
