//! Dependency-based analysis for assignment insertions, and its
//! composition with value projection.
//!
//! One run of a program with `v := e` inserted before some statement
//! decides, for every other candidate insertion point, whether inserting an
//! assignment there instead is indistinguishable on this input. The run is
//! divided into *windows*: maximal segments with no interfering access —
//! no read of `v`, no write of `v` other than by the inserted assignment,
//! and no write to a variable read by any pool expression. Within a window
//! the pool expressions evaluate to the same values everywhere, so insertion
//! points inside the same window are interchangeable, and a single value
//! projection at the moment the inserted assignment runs applies to the
//! whole window.
//!
//! At each window boundary the per-location candidate sets are updated:
//! if the inserted assignment ran in the window, locations visited in the
//! window keep the window's projected pool (intersection) and unvisited
//! locations are cleared — a patch there would not have executed its
//! assignment where the real one did. If the inserted assignment did not
//! run, visited locations are cleared instead: a patch there would have
//! executed an assignment the real run never performed. Sets only shrink,
//! and the executed (location, right-hand side) pair always survives.

use std::collections::{BTreeMap, BTreeSet};

use crate::lang::{
    eval_expr, exec_traced, ExprPath, LocationId, Program, RunOutcome, RuntimeErrorKind, State,
    Stmt, StmtKind, Tracer, Value,
};
use crate::synth::ExprSpace;

use super::AnalysisEvent;

/// Configuration of a dependency/composed analysis run.
///
/// `inserted_at` is the base-program location the executed patch inserts
/// before, `left` the assigned variable, `rhs_pool` the candidate
/// right-hand sides (a singleton for the pure dependency relation), and
/// `candidate_locations` the insertion points under consideration.
/// `left` must not be read by any pool member, and `inserted_at` must be a
/// candidate location.
#[derive(Debug, Clone)]
pub struct DepsAnalysisConfig {
    pub inserted_at: LocationId,
    pub left: String,
    pub rhs_pool: ExprSpace,
    pub candidate_locations: BTreeSet<LocationId>,
    pub log_events: bool,
}

impl DepsAnalysisConfig {
    pub fn new(
        inserted_at: LocationId,
        left: impl Into<String>,
        rhs_pool: ExprSpace,
        candidate_locations: BTreeSet<LocationId>,
    ) -> DepsAnalysisConfig {
        DepsAnalysisConfig {
            inserted_at,
            left: left.into(),
            rhs_pool,
            candidate_locations,
            log_events: false,
        }
    }
}

/// Result of a dependency/composed analysis run.
#[derive(Debug, Clone)]
pub struct DepsRun {
    /// Outcome of the execution, identical to plain execution.
    pub outcome: RunOutcome,
    /// For each candidate location, the right-hand sides whose insertion
    /// there is indistinguishable from the executed patch. Locations ruled
    /// out entirely map to an empty space.
    pub surviving: BTreeMap<LocationId, ExprSpace>,
    /// Candidate locations whose insertion point was reached at least once.
    pub reached: BTreeSet<LocationId>,
    pub events: Vec<AnalysisEvent>,
}

struct DepsTracer<'a> {
    cfg: &'a DepsAnalysisConfig,
    pool: Vec<&'a crate::lang::Expr>,
    pool_read_vars: BTreeSet<String>,
    inserted_assign_loc: LocationId,
    /// right-hand-side slot of the inserted assignment, observed so a fault
    /// inside it is attributed correctly
    inserted_rhs_path: ExprPath,
    /// surviving[loc] is a mask over `pool`
    surviving: BTreeMap<LocationId, Vec<bool>>,
    window_reached: BTreeSet<LocationId>,
    window_pool: Vec<bool>,
    executed_in_window: bool,
    /// state at a fault raised inside the inserted right-hand side, if any
    insertion_fault: Option<State>,
    ever_reached: BTreeSet<LocationId>,
    involved: BTreeSet<String>,
    events: Option<Vec<AnalysisEvent>>,
}

impl<'a> DepsTracer<'a> {
    fn new(cfg: &'a DepsAnalysisConfig, inserted_assign_loc: LocationId) -> DepsTracer<'a> {
        let pool: Vec<_> = cfg.rhs_pool.iter().collect();
        let pool_read_vars = cfg.rhs_pool.vars();
        let mut involved = pool_read_vars.clone();
        involved.insert(cfg.left.clone());
        DepsTracer {
            cfg,
            pool_read_vars,
            inserted_assign_loc,
            inserted_rhs_path: ExprPath::slot(inserted_assign_loc),
            surviving: cfg
                .candidate_locations
                .iter()
                .map(|&loc| (loc, vec![true; pool.len()]))
                .collect(),
            window_reached: BTreeSet::new(),
            window_pool: vec![true; pool.len()],
            executed_in_window: false,
            insertion_fault: None,
            ever_reached: BTreeSet::new(),
            involved,
            events: cfg.log_events.then(Vec::new),
            pool,
        }
    }

    fn visit(&mut self, loc: LocationId) {
        self.window_reached.insert(loc);
        self.ever_reached.insert(loc);
    }

    fn flush(&mut self, kind: &'static str, sigma: &State) {
        if self.executed_in_window {
            for (&loc, mask) in self.surviving.iter_mut() {
                if self.window_reached.contains(&loc) {
                    for (m, w) in mask.iter_mut().zip(&self.window_pool) {
                        *m = *m && *w;
                    }
                } else {
                    mask.fill(false);
                }
            }
        } else {
            for &loc in &self.window_reached {
                if let Some(mask) = self.surviving.get_mut(&loc) {
                    for (m, w) in mask.iter_mut().zip(&self.window_pool) {
                        *m = *m && !*w;
                    }
                }
            }
        }
        self.window_reached.clear();
        self.window_pool.fill(true);
        self.executed_in_window = false;
        if let Some(events) = &mut self.events {
            let survivors = self
                .surviving
                .values()
                .map(|mask| mask.iter().filter(|&&b| b).count())
                .sum();
            events.push(AnalysisEvent {
                kind,
                at: "-".into(),
                state: AnalysisEvent::snapshot(sigma, &self.involved),
                survivors,
            });
        }
    }

    fn finish(mut self, outcome: RunOutcome, final_state: &State) -> DepsRun {
        if let Some(sigma) = self.insertion_fault.take() {
            // The inserted assignment itself faulted. A patch at another
            // location would not fault here, so only insertions at the same
            // point whose right-hand side also faults under this state are
            // known to behave identically.
            for (&loc, mask) in self.surviving.iter_mut() {
                if loc == self.cfg.inserted_at {
                    for (i, alive) in mask.iter_mut().enumerate() {
                        *alive = *alive && eval_expr(self.pool[i], &sigma).is_err();
                    }
                } else {
                    mask.fill(false);
                }
            }
        } else if matches!(outcome, RunOutcome::Final(_)) {
            // A completed run closes the last window: the assertion reads
            // the final state, so the end of the run acts like a boundary.
            self.flush("flush-end", final_state);
        }
        // A run cut short by a fault or fuel keeps the state of the last
        // completed boundary instead: the open window saw no read or write
        // of the tracked variables, so nothing before the death point can
        // distinguish the insertions, and nothing after it is observable.
        let surviving = self
            .surviving
            .iter()
            .map(|(&loc, mask)| {
                let exprs: Vec<_> = self
                    .pool
                    .iter()
                    .zip(mask)
                    .filter(|(_, &alive)| alive)
                    .map(|(e, _)| (*e).clone())
                    .collect();
                (loc, ExprSpace::from_ordered(self.cfg.rhs_pool.ty(), exprs))
            })
            .collect();
        DepsRun {
            outcome,
            surviving,
            reached: self.ever_reached,
            events: self.events.unwrap_or_default(),
        }
    }
}

impl Tracer for DepsTracer<'_> {
    fn marked_path(&self) -> Option<&ExprPath> {
        Some(&self.inserted_rhs_path)
    }

    fn on_marked(&mut self, sigma: &State, result: &Result<Value, RuntimeErrorKind>) {
        if result.is_err() {
            if self.executed_in_window {
                self.flush("flush-reexec", sigma);
            }
            self.insertion_fault = Some(sigma.clone());
        }
    }

    fn on_stmt_enter(&mut self, stmt: &Stmt, _sigma: &State) {
        if stmt.loc == self.inserted_assign_loc {
            // the inserted assignment sits exactly at the insertion point
            // of `inserted_at`
            self.visit(self.cfg.inserted_at);
        } else if self.cfg.candidate_locations.contains(&stmt.loc) {
            self.visit(stmt.loc);
        }
    }

    fn on_var_read(&mut self, name: &str, sigma: &State) {
        if name == self.cfg.left {
            self.flush("flush-read", sigma);
        }
    }

    fn on_assign(&mut self, loc: LocationId, var: &str, value: i64, sigma: &State) {
        if loc == self.inserted_assign_loc {
            // the inserted assignment executed: at most one occurrence per
            // window, so an already-open occurrence closes first
            if self.executed_in_window {
                self.flush("flush-reexec", sigma);
                self.visit(self.cfg.inserted_at);
            }
            for (i, e) in self.pool.iter().enumerate() {
                if self.window_pool[i] && eval_expr(e, sigma) != Ok(Value::Int(value)) {
                    self.window_pool[i] = false;
                }
            }
            self.executed_in_window = true;
            if let Some(events) = &mut self.events {
                events.push(AnalysisEvent {
                    kind: "project",
                    at: self.cfg.inserted_at.to_string(),
                    state: AnalysisEvent::snapshot(sigma, &self.involved),
                    survivors: self.window_pool.iter().filter(|&&b| b).count(),
                });
            }
        } else if var == self.cfg.left || self.pool_read_vars.contains(var) {
            self.flush("flush-write", sigma);
        }
    }
}

/// Locates the assignment statement that `apply_patch` installed
/// immediately before `inserted_at`: the left sibling in the wrapping
/// sequence node.
fn find_inserted_assign(p: &Program, inserted_at: LocationId, left: &str) -> Option<LocationId> {
    let mut found = None;
    p.body.visit(&mut |s| {
        if let StmtKind::Seq(a, b) = &s.kind {
            if b.loc == inserted_at {
                if let StmtKind::Assign { var, .. } = &a.kind {
                    if var == left {
                        found = Some(a.loc);
                    }
                }
            }
        }
    });
    found
}

fn run(p_patched: &Program, input: &State, cfg: &DepsAnalysisConfig, fuel: u64) -> DepsRun {
    assert!(
        cfg.candidate_locations.contains(&cfg.inserted_at),
        "inserted_at must be one of the candidate locations"
    );
    assert!(
        !cfg.rhs_pool.vars().contains(&cfg.left),
        "pool expressions must not read the assigned variable `{}`",
        cfg.left
    );
    for &loc in &cfg.candidate_locations {
        let stmt = p_patched
            .stmt_at(loc)
            .unwrap_or_else(|| panic!("candidate location {loc} does not exist in the program"));
        assert!(!stmt.is_seq(), "candidate location {loc} must not be a sequence node");
    }
    let inserted_assign_loc = find_inserted_assign(p_patched, cfg.inserted_at, &cfg.left)
        .unwrap_or_else(|| {
            panic!(
                "program has no `{} := _` installed immediately before location {}",
                cfg.left, cfg.inserted_at
            )
        });
    let installed_rhs = match &p_patched.stmt_at(inserted_assign_loc).unwrap().kind {
        StmtKind::Assign { rhs, .. } => rhs.clone(),
        _ => unreachable!(),
    };
    assert!(
        cfg.rhs_pool.contains(&installed_rhs),
        "installed right-hand side `{installed_rhs}` must be a member of the pool"
    );

    let mut tracer = DepsTracer::new(cfg, inserted_assign_loc);
    let outcome = exec_traced(p_patched, input, fuel, &mut tracer);
    let final_state = outcome.final_state().cloned().unwrap_or_else(State::new);
    tracer.finish(outcome, &final_state)
}

/// Pure dependency analysis: a single right-hand side, candidate insertion
/// locations. `p_patched` must be the base program with `left := e`
/// installed immediately before the statement at `inserted_at`.
pub fn exec_deps(p_patched: &Program, input: &State, cfg: &DepsAnalysisConfig, fuel: u64) -> DepsRun {
    assert_eq!(cfg.rhs_pool.len(), 1, "pure dependency analysis takes a singleton pool");
    run(p_patched, input, cfg, fuel)
}

/// Composed analysis: dependency windows plus value projection of the
/// right-hand-side pool. With a singleton pool this coincides with
/// [`exec_deps`].
pub fn exec_composed(
    p_patched: &Program,
    input: &State,
    cfg: &DepsAnalysisConfig,
    fuel: u64,
) -> DepsRun {
    assert!(!cfg.rhs_pool.is_empty(), "composed analysis needs a non-empty pool");
    run(p_patched, input, cfg, fuel)
}
