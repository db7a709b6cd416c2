//! The repair engine: cost-ordered exploration, class registries, and the
//! enumeration baseline.

mod class;
mod explore;

pub use class::{ClassMembers, EquivClass};
pub use explore::{
    eval_assign_class, eval_value_class, naive_explore, repair, CandidateRecord, ClassEval,
    Disposition, Mode, RepairError, RepairOptions, RepairSession, SessionStats, StepKind,
    Strategy, TestStats, TraceRecord,
};
