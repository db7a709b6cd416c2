//! Test-driven program repair for a small imperative language.
//!
//! Given a buggy program, a test suite and a space of candidate patches
//! built from transformation schemas, the engine searches for the
//! minimum-cost patch that passes every test. Instead of executing each
//! candidate separately, every test execution partitions the space on the
//! fly: an instrumented run computes the whole class of candidates that
//! behave identically on that test, so one execution settles the verdict
//! for all of them.

pub mod engine;
pub mod equiv;
pub mod lang;
pub mod space;
pub mod synth;

pub use engine::{
    naive_explore, repair, EquivClass, Mode, RepairError, RepairOptions, RepairSession, Strategy,
};
pub use lang::{
    eval_expr, exec, parse_expr, parse_program, print_program, run_test, Expr, ExprPath,
    LocationId, Program, RunOutcome, State, Test, Verdict,
};
pub use space::{apply_patch, build_space, pick, CostFn, Patch, PatchSpace, SchemaConfig, SynthConfig};
pub use synth::{enumerate_exprs, project_value, synthesize, ExprSpace, GenConfig, SynthesisSpec};
