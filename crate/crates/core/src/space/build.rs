//! Search-space construction via the transformation schemas.
//!
//! Each schema is applied to every admitted site of the base program:
//! expression replacement at every maximal expression occurrence (in this
//! language every expression is side-effect free, so the maximal occurrences
//! are exactly the assignment right-hand sides and branch/loop conditions),
//! condition refinement with both connectives, guards around assignments,
//! and assignment insertion before every non-sequence statement for every
//! visible variable. Patches identical to the original code are removed.
//!
//! Patches are grouped so that one equivalence-analysis run covers a whole
//! group: value-schema groups share an anchored expression occurrence and
//! differ only in the synthesized expression; insertion groups share the
//! assigned variable and right-hand-side pool and range over locations.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::lang::{Expr, ExprPath, LocationId, Program, StmtKind, Ty};
use crate::synth::{enumerate_exprs, ExprSpace, GenConfig, SpaceError, DEFAULT_SPACE_CAP};

use super::cost::CostFn;
use super::patch::{Connective, Patch};

/// Which schemas to apply, and an optional restriction of the admitted
/// anchor locations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaConfig {
    pub expression: bool,
    pub refinement: bool,
    pub guard: bool,
    pub assignment: bool,
    pub locations: Option<BTreeSet<LocationId>>,
}

impl Default for SchemaConfig {
    fn default() -> SchemaConfig {
        SchemaConfig {
            expression: true,
            refinement: true,
            guard: true,
            assignment: true,
            locations: None,
        }
    }
}

impl SchemaConfig {
    fn admits(&self, loc: LocationId) -> bool {
        self.locations.as_ref().map_or(true, |set| set.contains(&loc))
    }
}

/// Expression-synthesis configuration for the schemas: the visible
/// variables, the literal pool, the node budget, and an optional explicit
/// expression list that replaces enumeration entirely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthConfig {
    pub vars: BTreeSet<String>,
    pub constants: BTreeSet<i64>,
    pub max_nodes: usize,
    pub cap: usize,
    pub explicit: Option<Vec<Expr>>,
}

impl Default for SynthConfig {
    fn default() -> SynthConfig {
        SynthConfig {
            vars: BTreeSet::new(),
            constants: [0, 1, 2].into_iter().collect(),
            max_nodes: 7,
            cap: DEFAULT_SPACE_CAP,
            explicit: None,
        }
    }
}

/// Identity of a patch group: the anchor shared by all its members.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupKey {
    Replace { path: ExprPath },
    Refine { path: ExprPath, connective: Connective },
    Guard { loc: LocationId },
    Assign { var: String },
}

/// A set of patches evaluated together by one analysis run.
#[derive(Debug, Clone)]
pub struct PatchGroup {
    pub key: GroupKey,
    /// Candidate expressions (the synthesized part of each member).
    pub space: ExprSpace,
    /// Insertion sites; non-empty only for assignment groups.
    pub locs: Vec<LocationId>,
}

impl PatchGroup {
    pub fn len(&self) -> usize {
        match self.key {
            GroupKey::Assign { .. } => self.locs.len() * self.space.len(),
            _ => self.space.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Materializes a member patch from its synthesized expression (and
    /// location, for assignment groups).
    fn patch_for(&self, loc: Option<LocationId>, e: &Expr) -> Patch {
        match &self.key {
            GroupKey::Replace { path } => Patch::ReplaceExpr { path: path.clone(), new: e.clone() },
            GroupKey::Refine { path, connective } => Patch::Refine {
                path: path.clone(),
                connective: *connective,
                new: e.clone(),
            },
            GroupKey::Guard { loc } => Patch::Guard { loc: *loc, cond: e.clone() },
            GroupKey::Assign { var } => Patch::InsertAssign {
                loc: loc.expect("assignment patches carry a location"),
                var: var.clone(),
                rhs: e.clone(),
            },
        }
    }

    pub fn patches(&self) -> Vec<Patch> {
        match &self.key {
            GroupKey::Assign { .. } => self
                .locs
                .iter()
                .flat_map(|&loc| self.space.iter().map(move |e| self.patch_for(Some(loc), e)))
                .collect(),
            _ => self.space.iter().map(|e| self.patch_for(None, e)).collect(),
        }
    }

    /// Whether `patch` belongs to this group.
    pub fn contains(&self, patch: &Patch) -> bool {
        match (&self.key, patch) {
            (GroupKey::Replace { path }, Patch::ReplaceExpr { path: p, new }) => {
                path == p && self.space.contains(new)
            }
            (
                GroupKey::Refine { path, connective },
                Patch::Refine { path: p, connective: c, new },
            ) => path == p && connective == c && self.space.contains(new),
            (GroupKey::Guard { loc }, Patch::Guard { loc: l, cond }) => {
                loc == l && self.space.contains(cond)
            }
            (GroupKey::Assign { var }, Patch::InsertAssign { loc, var: v, rhs }) => {
                var == v && self.locs.contains(loc) && self.space.contains(rhs)
            }
            _ => false,
        }
    }
}

/// The complete candidate space for one base program.
#[derive(Debug, Clone)]
pub struct PatchSpace {
    pub base: Program,
    pub groups: Vec<PatchGroup>,
}

impl PatchSpace {
    pub fn total(&self) -> usize {
        self.groups.iter().map(PatchGroup::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// Every patch with the index of its group, in deterministic order.
    pub fn iter_patches(&self) -> impl Iterator<Item = (usize, Patch)> + '_ {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(i, g)| g.patches().into_iter().map(move |p| (i, p)))
    }

    /// Finds the group a patch belongs to.
    pub fn group_of(&self, patch: &Patch) -> Option<(usize, &PatchGroup)> {
        self.groups
            .iter()
            .enumerate()
            .find(|(_, g)| g.contains(patch))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot pick from an empty patch space")]
pub struct EmptySpace;

/// The minimum of the space under (cost, serialization).
pub fn pick(space: &PatchSpace, cost_fn: &CostFn) -> Result<Patch, EmptySpace> {
    space
        .iter_patches()
        .map(|(_, p)| p)
        .min_by_key(|p| cost_fn.key(p, &space.base))
        .ok_or(EmptySpace)
}

struct SpaceBuilder<'a> {
    synth: &'a SynthConfig,
    cache: BTreeMap<(Ty, Vec<String>), ExprSpace>,
}

impl SpaceBuilder<'_> {
    fn space_over(&mut self, ty: Ty, vars: &BTreeSet<String>) -> Result<ExprSpace, SpaceError> {
        let key = (ty, vars.iter().cloned().collect::<Vec<_>>());
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.clone());
        }
        let space = match &self.synth.explicit {
            Some(list) => {
                let matching = list.iter().filter(|e| e.ty() == Ok(ty)).cloned();
                ExprSpace::from_exprs(ty, matching)?
            }
            None => {
                let cfg = GenConfig {
                    vars: vars.clone(),
                    constants: self.synth.constants.clone(),
                    max_nodes: self.synth.max_nodes,
                    cap: self.synth.cap,
                };
                enumerate_exprs(ty, &cfg)?
            }
        };
        self.cache.insert(key, space.clone());
        Ok(space)
    }
}

/// Builds the patch space of a program under the given schema and
/// synthesis configuration.
pub fn build_space(
    p: &Program,
    schemas: &SchemaConfig,
    synth: &SynthConfig,
) -> Result<PatchSpace, SpaceError> {
    let mut builder = SpaceBuilder { synth, cache: BTreeMap::new() };
    let mut groups: Vec<PatchGroup> = Vec::new();

    // value-schema groups, in statement pre-order
    let mut sites = Vec::new();
    p.body.visit(&mut |s| sites.push(s.clone()));
    for stmt in &sites {
        if stmt.is_seq() || !schemas.admits(stmt.loc) {
            continue;
        }
        match &stmt.kind {
            StmtKind::Assign { rhs, .. } => {
                if schemas.expression {
                    let space = builder.space_over(Ty::Int, &synth.vars)?;
                    let space = space.filtered(|e| e != rhs);
                    if !space.is_empty() {
                        groups.push(PatchGroup {
                            key: GroupKey::Replace { path: ExprPath::slot(stmt.loc) },
                            space,
                            locs: Vec::new(),
                        });
                    }
                }
                if schemas.guard {
                    let space = builder.space_over(Ty::Bool, &synth.vars)?;
                    if !space.is_empty() {
                        groups.push(PatchGroup {
                            key: GroupKey::Guard { loc: stmt.loc },
                            space,
                            locs: Vec::new(),
                        });
                    }
                }
            }
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => {
                if schemas.expression {
                    let space = builder.space_over(Ty::Bool, &synth.vars)?;
                    let space = space.filtered(|e| e != cond);
                    if !space.is_empty() {
                        groups.push(PatchGroup {
                            key: GroupKey::Replace { path: ExprPath::slot(stmt.loc) },
                            space,
                            locs: Vec::new(),
                        });
                    }
                }
                if schemas.refinement {
                    let space = builder.space_over(Ty::Bool, &synth.vars)?;
                    if !space.is_empty() {
                        for connective in [Connective::And, Connective::Or] {
                            groups.push(PatchGroup {
                                key: GroupKey::Refine {
                                    path: ExprPath::slot(stmt.loc),
                                    connective,
                                },
                                space: space.clone(),
                                locs: Vec::new(),
                            });
                        }
                    }
                }
            }
            StmtKind::Skip | StmtKind::Seq(..) => {}
        }
    }

    // assignment-insertion groups: one per target variable, spanning every
    // admitted insertion site; the pool never reads the assigned variable
    if schemas.assignment {
        let insertion_sites: Vec<LocationId> = sites
            .iter()
            .filter(|s| !s.is_seq() && schemas.admits(s.loc))
            .map(|s| s.loc)
            .collect();
        if !insertion_sites.is_empty() {
            for var in &synth.vars {
                let mut pool_vars = synth.vars.clone();
                pool_vars.remove(var);
                let pool = builder.space_over(Ty::Int, &pool_vars)?;
                if pool.is_empty() {
                    continue;
                }
                groups.push(PatchGroup {
                    key: GroupKey::Assign { var: var.clone() },
                    space: pool,
                    locs: insertion_sites.clone(),
                });
            }
        }
    }

    let space = PatchSpace { base: p.clone(), groups };
    if space.total() > synth.cap {
        return Err(SpaceError::TooLarge { cap: synth.cap });
    }
    Ok(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_expr, parse_program};
    use crate::space::apply_patch;

    fn synth(vars: &[&str], constants: &[i64], max_nodes: usize) -> SynthConfig {
        SynthConfig {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            constants: constants.iter().copied().collect(),
            max_nodes,
            cap: DEFAULT_SPACE_CAP,
            explicit: None,
        }
    }

    const BUGGY: &str = "while i > 0 do if i > 1 then c := c + 1 else skip fi ; i := i - 1 od";

    #[test]
    fn explicit_expressions_pin_the_space() {
        let p = parse_program(BUGGY).unwrap();
        let schemas = SchemaConfig {
            expression: true,
            refinement: false,
            guard: false,
            assignment: false,
            locations: Some([LocationId(2)].into_iter().collect()),
        };
        let mut cfg = synth(&["i", "c"], &[0, 1, 2], 5);
        cfg.explicit = Some(
            ["i >= 0", "c >= 0", "i mod 2 = 1", "i mod 2 = 0", "i > 2"]
                .iter()
                .map(|t| parse_expr(t).unwrap())
                .collect(),
        );
        let space = build_space(&p, &schemas, &cfg).unwrap();
        assert_eq!(space.total(), 5);
        assert_eq!(space.groups.len(), 1);
    }

    #[test]
    fn disabled_schemas_yield_an_empty_space() {
        let p = parse_program(BUGGY).unwrap();
        let schemas = SchemaConfig {
            expression: false,
            refinement: false,
            guard: false,
            assignment: false,
            locations: None,
        };
        let space = build_space(&p, &schemas, &synth(&["i", "c"], &[0], 3)).unwrap();
        assert!(space.is_empty());
    }

    #[test]
    fn group_counts_match_a_site_enumeration() {
        let p = parse_program("a := b + 1 ; if a > c then b := 0 else skip fi").unwrap();
        let cfg = synth(&["a", "b", "c"], &[0, 1], 3);
        let space = build_space(&p, &SchemaConfig::default(), &cfg).unwrap();

        // independent walk: 2 assignments, 1 condition, no while
        let expr_slots = 3; // two rhs + one condition
        let conditions = 1;
        let assignments = 2;
        let non_seq_statements = 4; // a:=, if, b:=, skip
        let vars = 3;

        let replace_groups =
            space.groups.iter().filter(|g| matches!(g.key, GroupKey::Replace { .. })).count();
        let refine_groups =
            space.groups.iter().filter(|g| matches!(g.key, GroupKey::Refine { .. })).count();
        let guard_groups =
            space.groups.iter().filter(|g| matches!(g.key, GroupKey::Guard { .. })).count();
        let assign_groups =
            space.groups.iter().filter(|g| matches!(g.key, GroupKey::Assign { .. })).count();

        assert_eq!(replace_groups, expr_slots);
        assert_eq!(refine_groups, 2 * conditions);
        assert_eq!(guard_groups, assignments);
        assert_eq!(assign_groups, vars);

        for g in &space.groups {
            if let GroupKey::Assign { .. } = g.key {
                assert_eq!(g.locs.len(), non_seq_statements);
            }
        }

        // total is the sum of group sizes
        let sum: usize = space.groups.iter().map(PatchGroup::len).sum();
        assert_eq!(space.total(), sum);
    }

    #[test]
    fn every_emitted_patch_applies_and_differs_from_base() {
        let p = parse_program(BUGGY).unwrap();
        let schemas = SchemaConfig::default();
        let space = build_space(&p, &schemas, &synth(&["i", "c"], &[0, 1], 3)).unwrap();
        assert!(space.total() > 0);
        for (_, patch) in space.iter_patches().take(500) {
            let patched = apply_patch(&p, &patch).unwrap();
            assert_ne!(patched, p, "{patch}");
        }
    }

    #[test]
    fn insertion_pools_exclude_the_assigned_variable() {
        let p = parse_program("a := b").unwrap();
        let space = build_space(
            &p,
            &SchemaConfig { expression: false, refinement: false, guard: false, assignment: true, locations: None },
            &synth(&["a", "b"], &[], 1),
        )
        .unwrap();
        for g in &space.groups {
            let GroupKey::Assign { var } = &g.key else { panic!() };
            assert!(!g.space.vars().contains(var));
        }
    }

    #[test]
    fn pick_returns_the_cheapest_then_lexicographic() {
        let p = parse_program("x := y").unwrap();
        let space = build_space(
            &p,
            &SchemaConfig { expression: true, refinement: false, guard: false, assignment: false, locations: None },
            &synth(&["x", "y"], &[0, 1], 3),
        )
        .unwrap();
        let best = pick(&space, &CostFn::AstDistance).unwrap();
        // cheapest replacements are single-leaf swaps of the rhs; the
        // tie-break picks the smallest serialization
        let all: Vec<(String, String)> = space
            .iter_patches()
            .map(|(_, pt)| {
                let k = CostFn::AstDistance.key(&pt, &p);
                (format!("{:08.3}|{}", k.0, k.1), pt.serialize())
            })
            .collect();
        let min = all.iter().min().unwrap();
        assert_eq!(best.serialize(), min.1);
    }
}
