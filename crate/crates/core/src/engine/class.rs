//! Registered test-equivalence classes.

use std::collections::{BTreeMap, BTreeSet};

use crate::lang::{Expr, LocationId, Verdict};
use crate::space::{GroupKey, Patch};

/// The members of one class, stored compactly against the group anchor so
/// membership of a patch is a set lookup rather than a program comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassMembers {
    /// Patches of one value-schema group (replacement, refinement or
    /// guard) that share the observed value sequence.
    Value { key: GroupKey, exprs: BTreeSet<Expr> },
    /// Insertions of `var := e` that are interchangeable: for each
    /// location, the right-hand sides equivalent to the executed one.
    Assign { var: String, by_loc: BTreeMap<LocationId, BTreeSet<Expr>> },
}

/// One test-equivalence class: every member behaves like the executed
/// candidate on `test`, so all of them share `verdict`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivClass {
    pub test: String,
    pub verdict: Verdict,
    pub members: ClassMembers,
}

impl EquivClass {
    pub fn contains(&self, patch: &Patch) -> bool {
        match (&self.members, patch) {
            (ClassMembers::Value { key, exprs }, _) => match (key, patch) {
                (GroupKey::Replace { path }, Patch::ReplaceExpr { path: p, new }) => {
                    path == p && exprs.contains(new)
                }
                (
                    GroupKey::Refine { path, connective },
                    Patch::Refine { path: p, connective: c, new },
                ) => path == p && connective == c && exprs.contains(new),
                (GroupKey::Guard { loc }, Patch::Guard { loc: l, cond }) => {
                    loc == l && exprs.contains(cond)
                }
                _ => false,
            },
            (ClassMembers::Assign { var, by_loc }, Patch::InsertAssign { loc, var: v, rhs }) => {
                var == v && by_loc.get(loc).is_some_and(|set| set.contains(rhs))
            }
            _ => false,
        }
    }

    pub fn size(&self) -> usize {
        match &self.members {
            ClassMembers::Value { exprs, .. } => exprs.len(),
            ClassMembers::Assign { by_loc, .. } => by_loc.values().map(BTreeSet::len).sum(),
        }
    }

    /// Materializes every member as a patch.
    pub fn patches(&self) -> Vec<Patch> {
        match &self.members {
            ClassMembers::Value { key, exprs } => exprs
                .iter()
                .map(|e| match key {
                    GroupKey::Replace { path } => {
                        Patch::ReplaceExpr { path: path.clone(), new: e.clone() }
                    }
                    GroupKey::Refine { path, connective } => Patch::Refine {
                        path: path.clone(),
                        connective: *connective,
                        new: e.clone(),
                    },
                    GroupKey::Guard { loc } => Patch::Guard { loc: *loc, cond: e.clone() },
                    GroupKey::Assign { .. } => {
                        unreachable!("assignment groups use ClassMembers::Assign")
                    }
                })
                .collect(),
            ClassMembers::Assign { var, by_loc } => by_loc
                .iter()
                .flat_map(|(&loc, exprs)| {
                    exprs.iter().map(move |e| Patch::InsertAssign {
                        loc,
                        var: var.clone(),
                        rhs: e.clone(),
                    })
                })
                .collect(),
        }
    }
}
