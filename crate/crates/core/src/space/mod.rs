//! Patch space: transformation schemas, patch application, and cost.

mod build;
mod cost;
mod patch;

pub use build::{build_space, pick, EmptySpace, GroupKey, PatchGroup, PatchSpace, SchemaConfig, SynthConfig};
pub use cost::{ast_distance, cost_value, Cost, CostFn};
pub use patch::{apply_patch, apply_patch_anchored, AppliedAnchor, ApplyError, Connective, Patch, PatchParseError};
