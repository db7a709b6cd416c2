//! Candidate patches and their application.
//!
//! A patch is a single schema application at one site: replace an
//! expression, refine a condition, guard an assignment, or insert an
//! assignment. Applying a patch preserves the statement ids of every
//! untouched statement; nodes introduced by the patch get fresh ids above
//! the base program's maximum, so analysis results on the patched program
//! map straight back to base locations.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lang::{
    parse_expr, BinOp, Expr, ExprPath, LocationId, Program, Stmt, StmtKind, Ty,
};

/// The connective a refinement appends with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Connective {
    And,
    Or,
}

impl Connective {
    pub fn op(self) -> BinOp {
        match self {
            Connective::And => BinOp::And,
            Connective::Or => BinOp::Or,
        }
    }
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Connective::And => write!(f, "AND"),
            Connective::Or => write!(f, "OR"),
        }
    }
}

/// One candidate modification of the base program.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Patch {
    /// Replace the expression at `path` with `new`.
    ReplaceExpr { path: ExprPath, new: Expr },
    /// Append `connective new` to the condition at `path`.
    Refine { path: ExprPath, connective: Connective, new: Expr },
    /// Wrap the assignment at `loc` in `if cond then ... else skip fi`.
    Guard { loc: LocationId, cond: Expr },
    /// Insert `var := rhs` immediately before the statement at `loc`.
    InsertAssign { loc: LocationId, var: String, rhs: Expr },
}

impl Patch {
    /// The base-program statement the modification is anchored to. Used
    /// for coverage accounting: a patch's code is executed by a test iff
    /// the test's run of the base program enters this statement.
    pub fn anchor_loc(&self) -> LocationId {
        match self {
            Patch::ReplaceExpr { path, .. } | Patch::Refine { path, .. } => path.loc,
            Patch::Guard { loc, .. } | Patch::InsertAssign { loc, .. } => *loc,
        }
    }

    /// The synthesized expression the patch plugs in.
    pub fn expr(&self) -> &Expr {
        match self {
            Patch::ReplaceExpr { new, .. } | Patch::Refine { new, .. } => new,
            Patch::Guard { cond, .. } => cond,
            Patch::InsertAssign { rhs, .. } => rhs,
        }
    }

    /// Canonical serialization; equality of patches coincides with equality
    /// of these strings.
    pub fn serialize(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Patch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Patch::ReplaceExpr { path, new } => write!(f, "REPLACE {path} WITH {new}"),
            Patch::Refine { path, connective, new } => {
                write!(f, "REFINE {path} {connective} {new}")
            }
            Patch::Guard { loc, cond } => write!(f, "GUARD {loc} IF {cond}"),
            Patch::InsertAssign { loc, var, rhs } => write!(f, "INSERT {loc} {var} := {rhs}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse patch `{input}`: {msg}")]
pub struct PatchParseError {
    pub input: String,
    pub msg: String,
}

fn parse_path(text: &str) -> Result<ExprPath, String> {
    let mut parts = text.split('.');
    let loc = parts
        .next()
        .and_then(|p| p.parse::<u32>().ok())
        .ok_or_else(|| format!("bad path `{text}`"))?;
    let mut steps = Vec::new();
    for p in parts {
        steps.push(p.parse::<u8>().map_err(|_| format!("bad path `{text}`"))?);
    }
    Ok(ExprPath { loc: LocationId(loc), steps })
}

impl FromStr for Patch {
    type Err = PatchParseError;

    fn from_str(s: &str) -> Result<Patch, PatchParseError> {
        let err = |msg: String| PatchParseError { input: s.to_string(), msg };
        let mut words = s.split_whitespace();
        let head = words.next().ok_or_else(|| err("empty input".into()))?;
        let rest = |n: usize| -> String {
            s.split_whitespace().skip(n).collect::<Vec<_>>().join(" ")
        };
        match head {
            "REPLACE" => {
                let path = parse_path(words.next().ok_or_else(|| err("missing path".into()))?)
                    .map_err(&err)?;
                if words.next() != Some("WITH") {
                    return Err(err("expected WITH".into()));
                }
                let new = parse_expr(&rest(3)).map_err(|e| err(e.to_string()))?;
                Ok(Patch::ReplaceExpr { path, new })
            }
            "REFINE" => {
                let path = parse_path(words.next().ok_or_else(|| err("missing path".into()))?)
                    .map_err(&err)?;
                let connective = match words.next() {
                    Some("AND") => Connective::And,
                    Some("OR") => Connective::Or,
                    other => return Err(err(format!("expected AND or OR, found {other:?}"))),
                };
                let new = parse_expr(&rest(3)).map_err(|e| err(e.to_string()))?;
                Ok(Patch::Refine { path, connective, new })
            }
            "GUARD" => {
                let loc = words
                    .next()
                    .and_then(|w| w.parse::<u32>().ok())
                    .ok_or_else(|| err("missing location".into()))?;
                if words.next() != Some("IF") {
                    return Err(err("expected IF".into()));
                }
                let cond = parse_expr(&rest(3)).map_err(|e| err(e.to_string()))?;
                Ok(Patch::Guard { loc: LocationId(loc), cond })
            }
            "INSERT" => {
                let loc = words
                    .next()
                    .and_then(|w| w.parse::<u32>().ok())
                    .ok_or_else(|| err("missing location".into()))?;
                let var = words.next().ok_or_else(|| err("missing variable".into()))?;
                if words.next() != Some(":=") {
                    return Err(err("expected :=".into()));
                }
                let rhs = parse_expr(&rest(4)).map_err(|e| err(e.to_string()))?;
                Ok(Patch::InsertAssign { loc: LocationId(loc), var: var.to_string(), rhs })
            }
            other => Err(err(format!("unknown patch kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("anchor {0} not found in the program")]
    AnchorNotFound(String),
    #[error("patch produces an ill-typed program: {0}")]
    IllTyped(String),
}

/// Where the patched program carries the synthesized code: the marked
/// expression occurrence for the value relation, or the location of the
/// inserted assignment for the dependency relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AppliedAnchor {
    Marked(ExprPath),
    InsertedAssign { assign_loc: LocationId },
}

/// Applies a patch, returning the patched program and the anchor the
/// equivalence analyses need. Deterministic: fresh statement ids are
/// allocated in a fixed order above the base maximum.
pub fn apply_patch_anchored(p: &Program, patch: &Patch) -> Result<(Program, AppliedAnchor), ApplyError> {
    let max = p.max_loc().0;
    match patch {
        Patch::ReplaceExpr { path, new } => {
            let mut body = p.body.clone();
            let mut found = false;
            body.visit_mut(&mut |s| {
                if s.loc == path.loc && !found {
                    if let Some(slot) = s.expr_slot_mut() {
                        if let Some(target) = slot.descend_mut(&path.steps) {
                            *target = new.clone();
                            found = true;
                        }
                    }
                }
            });
            if !found {
                return Err(ApplyError::AnchorNotFound(path.to_string()));
            }
            let patched = Program::from_labelled(body);
            check_types(&patched)?;
            Ok((patched, AppliedAnchor::Marked(path.clone())))
        }
        Patch::Refine { path, connective, new } => {
            let mut body = p.body.clone();
            let mut found = false;
            body.visit_mut(&mut |s| {
                if s.loc == path.loc && !found {
                    if let Some(slot) = s.expr_slot_mut() {
                        if let Some(target) = slot.descend_mut(&path.steps) {
                            let old = std::mem::replace(target, Expr::Bool(false));
                            *target = Expr::binary(connective.op(), old, new.clone());
                            found = true;
                        }
                    }
                }
            });
            if !found {
                return Err(ApplyError::AnchorNotFound(path.to_string()));
            }
            let patched = Program::from_labelled(body);
            check_types(&patched)?;
            // the synthesized conjunct/disjunct is the right child
            Ok((patched, AppliedAnchor::Marked(path.child(1))))
        }
        Patch::Guard { loc, cond } => {
            let mut body = p.body.clone();
            let mut found = false;
            let if_loc = LocationId(max + 1);
            let skip_loc = LocationId(max + 2);
            body.visit_mut(&mut |s| {
                if s.loc == *loc && !found && matches!(s.kind, StmtKind::Assign { .. }) {
                    found = true;
                    let assign = std::mem::replace(s, Stmt { loc: skip_loc, kind: StmtKind::Skip });
                    *s = Stmt {
                        loc: if_loc,
                        kind: StmtKind::If {
                            cond: cond.clone(),
                            then_branch: Box::new(assign),
                            else_branch: Box::new(Stmt { loc: skip_loc, kind: StmtKind::Skip }),
                        },
                    };
                }
            });
            if !found {
                return Err(ApplyError::AnchorNotFound(loc.to_string()));
            }
            let patched = Program::from_labelled(body);
            check_types(&patched)?;
            Ok((patched, AppliedAnchor::Marked(ExprPath::slot(if_loc))))
        }
        Patch::InsertAssign { loc, var, rhs } => {
            let mut body = p.body.clone();
            let mut found = false;
            let assign_loc = LocationId(max + 1);
            let seq_loc = LocationId(max + 2);
            body.visit_mut(&mut |s| {
                if s.loc == *loc && !found {
                    found = true;
                    let original = std::mem::replace(s, Stmt { loc: seq_loc, kind: StmtKind::Skip });
                    let assign = Stmt {
                        loc: assign_loc,
                        kind: StmtKind::Assign { var: var.clone(), rhs: rhs.clone() },
                    };
                    *s = Stmt {
                        loc: seq_loc,
                        kind: StmtKind::Seq(Box::new(assign), Box::new(original)),
                    };
                }
            });
            if !found {
                return Err(ApplyError::AnchorNotFound(loc.to_string()));
            }
            let patched = Program::from_labelled(body);
            check_types(&patched)?;
            Ok((patched, AppliedAnchor::InsertedAssign { assign_loc }))
        }
    }
}

/// Applies a patch to the base program.
pub fn apply_patch(p: &Program, patch: &Patch) -> Result<Program, ApplyError> {
    apply_patch_anchored(p, patch).map(|(p, _)| p)
}

fn check_types(p: &Program) -> Result<(), ApplyError> {
    let mut err = None;
    p.body.visit(&mut |s| {
        if err.is_some() {
            return;
        }
        let want = match &s.kind {
            StmtKind::Assign { .. } => Some(Ty::Int),
            StmtKind::If { .. } | StmtKind::While { .. } => Some(Ty::Bool),
            _ => None,
        };
        if let (Some(want), Some(slot)) = (want, s.expr_slot()) {
            match slot.ty() {
                Ok(t) if t == want => {}
                Ok(t) => err = Some(format!("`{slot}` has type {t}, expected {want}")),
                Err(e) => err = Some(e.to_string()),
            }
        }
    });
    match err {
        None => Ok(()),
        Some(msg) => Err(ApplyError::IllTyped(msg)),
    }
}
