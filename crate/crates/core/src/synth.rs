//! Bounded expression enumeration and the value-projection interface.
//!
//! A search space is an explicit, deterministically ordered set of
//! expressions of one result type. The projection operator filters a space
//! down to the expressions that evaluate to a given value under a given
//! state; synthesis against a set of input-output pairs is the fold of
//! projections over the pairs.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::lang::{eval_expr, BinOp, Expr, State, Ty, Value};

/// Default cap on the number of enumerated expressions.
pub const DEFAULT_SPACE_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("expression space exceeds the cap of {cap} elements")]
    TooLarge { cap: usize },
    #[error("expression `{0}` has type {1}, expected {2}")]
    WrongType(String, Ty, Ty),
    #[error("ill-typed expression: {0}")]
    IllTyped(#[from] crate::lang::TypeError),
}

/// Enumeration parameters: which leaves are available and how large
/// expressions may grow, measured in AST nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub vars: BTreeSet<String>,
    pub constants: BTreeSet<i64>,
    pub max_nodes: usize,
    pub cap: usize,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig {
            vars: BTreeSet::new(),
            constants: [0, 1, 2].into_iter().collect(),
            max_nodes: 7,
            cap: DEFAULT_SPACE_CAP,
        }
    }
}

/// A finite, ordered, duplicate-free set of expressions sharing one result
/// type. Order is ascending node count, ties broken by the canonical
/// printed form; every operation that returns a subset preserves it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprSpace {
    ty: Ty,
    exprs: Vec<Expr>,
}

fn order_key(e: &Expr) -> (usize, String) {
    (e.node_count(), e.to_string())
}

impl ExprSpace {
    /// Builds a space from arbitrary expressions: type-checks, deduplicates
    /// and sorts into canonical order.
    pub fn from_exprs(ty: Ty, exprs: impl IntoIterator<Item = Expr>) -> Result<ExprSpace, SpaceError> {
        let mut exprs: Vec<Expr> = exprs.into_iter().collect();
        for e in &exprs {
            let found = e.ty()?;
            if found != ty {
                return Err(SpaceError::WrongType(e.to_string(), found, ty));
            }
        }
        exprs.sort_by_cached_key(order_key);
        exprs.dedup();
        Ok(ExprSpace { ty, exprs })
    }

    pub fn empty(ty: Ty) -> ExprSpace {
        ExprSpace { ty, exprs: Vec::new() }
    }

    /// Internal constructor for subsets that are already in order.
    pub(crate) fn from_ordered(ty: Ty, exprs: Vec<Expr>) -> ExprSpace {
        ExprSpace { ty, exprs }
    }

    pub fn ty(&self) -> Ty {
        self.ty
    }

    pub fn len(&self) -> usize {
        self.exprs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exprs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Expr> {
        self.exprs.iter()
    }

    pub fn first(&self) -> Option<&Expr> {
        self.exprs.first()
    }

    pub fn contains(&self, e: &Expr) -> bool {
        self.exprs.contains(e)
    }

    pub fn to_set(&self) -> BTreeSet<Expr> {
        self.exprs.iter().cloned().collect()
    }

    /// All variables read by any member.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for e in &self.exprs {
            e.collect_vars(&mut out);
        }
        out
    }

    /// Keeps the members satisfying `keep`, preserving order.
    pub fn filtered(&self, mut keep: impl FnMut(&Expr) -> bool) -> ExprSpace {
        ExprSpace {
            ty: self.ty,
            exprs: self.exprs.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a ExprSpace {
    type Item = &'a Expr;
    type IntoIter = std::slice::Iter<'a, Expr>;

    fn into_iter(self) -> Self::IntoIter {
        self.exprs.iter()
    }
}

const ARITH_OPS: [BinOp; 4] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Mod];
const BOOL_OPS: [BinOp; 2] = [BinOp::And, BinOp::Or];
const REL_OPS: [BinOp; 6] = [BinOp::Lt, BinOp::Le, BinOp::Eq, BinOp::Ne, BinOp::Gt, BinOp::Ge];

struct Enumerator<'a> {
    cfg: &'a GenConfig,
    arith: Vec<Vec<Expr>>, // arith[n] = arithmetic expressions of exactly n nodes
    boolean: Vec<Vec<Expr>>,
    produced: usize,
}

impl<'a> Enumerator<'a> {
    fn new(cfg: &'a GenConfig) -> Enumerator<'a> {
        Enumerator { cfg, arith: vec![Vec::new()], boolean: vec![Vec::new()], produced: 0 }
    }

    fn push(&mut self, bucket: usize, is_bool: bool, e: Expr) -> Result<(), SpaceError> {
        self.produced += 1;
        if self.produced > self.cfg.cap {
            return Err(SpaceError::TooLarge { cap: self.cfg.cap });
        }
        let table = if is_bool { &mut self.boolean } else { &mut self.arith };
        table[bucket].push(e);
        Ok(())
    }

    fn fill(&mut self, max_nodes: usize) -> Result<(), SpaceError> {
        for size in 1..=max_nodes {
            self.arith.push(Vec::new());
            self.boolean.push(Vec::new());
            if size == 1 {
                for v in &self.cfg.vars.clone() {
                    self.push(1, false, Expr::var(v.clone()))?;
                }
                for &n in &self.cfg.constants.clone() {
                    self.push(1, false, Expr::Num(n))?;
                }
                self.push(1, true, Expr::Bool(true))?;
                self.push(1, true, Expr::Bool(false))?;
                continue;
            }
            // binary node: 1 + |left| + |right| = size
            for left_size in 1..size.saturating_sub(1) {
                let right_size = size - 1 - left_size;
                if right_size == 0 {
                    continue;
                }
                for op in ARITH_OPS {
                    for li in 0..self.arith[left_size].len() {
                        for ri in 0..self.arith[right_size].len() {
                            let e = Expr::binary(
                                op,
                                self.arith[left_size][li].clone(),
                                self.arith[right_size][ri].clone(),
                            );
                            self.push(size, false, e)?;
                        }
                    }
                }
                for op in REL_OPS {
                    for li in 0..self.arith[left_size].len() {
                        for ri in 0..self.arith[right_size].len() {
                            let e = Expr::binary(
                                op,
                                self.arith[left_size][li].clone(),
                                self.arith[right_size][ri].clone(),
                            );
                            self.push(size, true, e)?;
                        }
                    }
                }
                for op in BOOL_OPS {
                    for li in 0..self.boolean[left_size].len() {
                        for ri in 0..self.boolean[right_size].len() {
                            let e = Expr::binary(
                                op,
                                self.boolean[left_size][li].clone(),
                                self.boolean[right_size][ri].clone(),
                            );
                            self.push(size, true, e)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Enumerates exactly the well-typed expressions of the requested result
/// type over the configured variables, constants and the language's
/// operators, up to `cfg.max_nodes` AST nodes.
pub fn enumerate_exprs(result_type: Ty, cfg: &GenConfig) -> Result<ExprSpace, SpaceError> {
    assert!(cfg.max_nodes >= 1, "max_nodes must be at least 1");
    let mut en = Enumerator::new(cfg);
    en.fill(cfg.max_nodes)?;
    let table = match result_type {
        Ty::Int => en.arith,
        Ty::Bool => en.boolean,
    };
    let mut exprs = Vec::new();
    for mut bucket in table {
        // within one size class, order is lexicographic on the printed form
        bucket.sort_by_cached_key(|e| e.to_string());
        exprs.append(&mut bucket);
    }
    exprs.dedup();
    Ok(ExprSpace::from_ordered(result_type, exprs))
}

/// The value-projection operator: the maximal subset of `space` whose
/// members evaluate to `n` under `sigma`. Members whose evaluation errors
/// under `sigma` are excluded. Order is preserved.
pub fn project_value(space: &ExprSpace, sigma: &State, n: Value) -> ExprSpace {
    debug_assert_eq!(space.ty(), n.ty(), "projection value must match the space's type");
    space.filtered(|e| eval_expr(e, sigma) == Ok(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("contradictory specification: state {state} maps to both {first} and {second}")]
pub struct ContradictorySpec {
    pub state: State,
    pub first: Value,
    pub second: Value,
}

/// A finite set of input-output pairs. Construction rejects two pairs that
/// give the same state different outputs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SynthesisSpec {
    pairs: Vec<(State, Value)>,
}

impl SynthesisSpec {
    pub fn new(pairs: Vec<(State, Value)>) -> Result<SynthesisSpec, ContradictorySpec> {
        for (i, (sigma, n)) in pairs.iter().enumerate() {
            for (sigma2, n2) in &pairs[i + 1..] {
                if sigma == sigma2 && n != n2 {
                    return Err(ContradictorySpec {
                        state: sigma.clone(),
                        first: *n,
                        second: *n2,
                    });
                }
            }
        }
        Ok(SynthesisSpec { pairs })
    }

    pub fn pairs(&self) -> &[(State, Value)] {
        &self.pairs
    }
}

/// Returns the first expression in space order satisfying every pair of
/// the specification, as the fold of value projections; `None` when no
/// member satisfies the spec. An empty spec is satisfied vacuously.
pub fn synthesize<'a>(space: &'a ExprSpace, spec: &SynthesisSpec) -> Option<&'a Expr> {
    let mut remaining = space.clone();
    for (sigma, n) in spec.pairs() {
        remaining = project_value(&remaining, sigma, *n);
        if remaining.is_empty() {
            return None;
        }
    }
    // map back into the caller's space so the reference outlives `remaining`
    let winner = remaining.first()?;
    space.iter().find(|e| *e == winner)
}
