//! Abstract syntax of the subject language.
//!
//! Programs are trees of statements over integer variables. Every statement
//! node carries a [`LocationId`]; the parser assigns them in pre-order, and
//! patch application preserves the ids of untouched statements so analysis
//! results computed on a patched program map back to base locations.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Identity of a statement node within a program.
///
/// Freshly parsed programs number their statements in pre-order; statements
/// introduced by patch application receive ids above the base program's
/// maximum, so base ids stay stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocationId(pub u32);

impl fmt::Display for LocationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Binary operators. Arithmetic operators combine integers, boolean
/// operators combine booleans, relational operators compare integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Mod,
    And,
    Or,
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl BinOp {
    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Mod)
    }

    pub fn is_boolean(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }

    pub fn is_relational(self) -> bool {
        !self.is_arithmetic() && !self.is_boolean()
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Mod => "mod",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }
}

/// Result type of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ty {
    Int,
    Bool,
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Int => write!(f, "int"),
            Ty::Bool => write!(f, "bool"),
        }
    }
}

/// Expressions. Variables always hold integers; booleans only arise from
/// literals, relational comparisons and boolean connectives.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Var(String),
    Num(i64),
    Bool(bool),
    Binary {
        op: BinOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type mismatch: expected {expected}, found {found} in `{context}`")]
pub struct TypeError {
    pub expected: Ty,
    pub found: Ty,
    pub context: String,
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn binary(op: BinOp, left: Expr, right: Expr) -> Expr {
        Expr::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Number of AST nodes.
    pub fn node_count(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Num(_) | Expr::Bool(_) => 1,
            Expr::Binary { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    /// Infers the result type, checking operand types along the way.
    pub fn ty(&self) -> Result<Ty, TypeError> {
        match self {
            Expr::Var(_) | Expr::Num(_) => Ok(Ty::Int),
            Expr::Bool(_) => Ok(Ty::Bool),
            Expr::Binary { op, left, right } => {
                let want = if op.is_boolean() { Ty::Bool } else { Ty::Int };
                for side in [left, right] {
                    let found = side.ty()?;
                    if found != want {
                        return Err(TypeError {
                            expected: want,
                            found,
                            context: side.to_string(),
                        });
                    }
                }
                Ok(if op.is_arithmetic() { Ty::Int } else { Ty::Bool })
            }
        }
    }

    /// Collects every variable name read by the expression.
    pub fn collect_vars(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Num(_) | Expr::Bool(_) => {}
            Expr::Binary { left, right, .. } => {
                left.collect_vars(out);
                right.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Descends along a child-index path. Index 0 is the left operand,
    /// index 1 the right.
    pub fn descend(&self, steps: &[u8]) -> Option<&Expr> {
        let mut cur = self;
        for &s in steps {
            cur = match cur {
                Expr::Binary { left, right, .. } => match s {
                    0 => left,
                    1 => right,
                    _ => return None,
                },
                _ => return None,
            };
        }
        Some(cur)
    }

    pub fn descend_mut(&mut self, steps: &[u8]) -> Option<&mut Expr> {
        let mut cur = self;
        for &s in steps {
            cur = match cur {
                Expr::Binary { left, right, .. } => match s {
                    0 => left,
                    1 => right,
                    _ => return None,
                },
                _ => return None,
            };
        }
        Some(cur)
    }
}

/// Addresses one expression occurrence: the statement that owns the
/// expression slot plus the child-index path from the slot's root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExprPath {
    pub loc: LocationId,
    pub steps: Vec<u8>,
}

impl ExprPath {
    pub fn slot(loc: LocationId) -> ExprPath {
        ExprPath { loc, steps: Vec::new() }
    }

    pub fn child(&self, step: u8) -> ExprPath {
        let mut steps = self.steps.clone();
        steps.push(step);
        ExprPath { loc: self.loc, steps }
    }
}

impl fmt::Display for ExprPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.loc)?;
        for s in &self.steps {
            write!(f, ".{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StmtKind {
    Skip,
    Assign { var: String, rhs: Expr },
    Seq(Box<Stmt>, Box<Stmt>),
    If { cond: Expr, then_branch: Box<Stmt>, else_branch: Box<Stmt> },
    While { cond: Expr, body: Box<Stmt> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stmt {
    pub loc: LocationId,
    pub kind: StmtKind,
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Stmt {
        Stmt { loc: LocationId(0), kind }
    }

    /// The expression slot owned by this statement, if any.
    pub fn expr_slot(&self) -> Option<&Expr> {
        match &self.kind {
            StmtKind::Assign { rhs, .. } => Some(rhs),
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
            StmtKind::Skip | StmtKind::Seq(..) => None,
        }
    }

    pub fn expr_slot_mut(&mut self) -> Option<&mut Expr> {
        match &mut self.kind {
            StmtKind::Assign { rhs, .. } => Some(rhs),
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
            StmtKind::Skip | StmtKind::Seq(..) => None,
        }
    }

    pub fn is_seq(&self) -> bool {
        matches!(self.kind, StmtKind::Seq(..))
    }

    /// Pre-order walk over statement nodes.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::Seq(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            StmtKind::If { then_branch, else_branch, .. } => {
                then_branch.visit(f);
                else_branch.visit(f);
            }
            StmtKind::While { body, .. } => body.visit(f),
            StmtKind::Skip | StmtKind::Assign { .. } => {}
        }
    }

    pub fn visit_mut(&mut self, f: &mut impl FnMut(&mut Stmt)) {
        f(self);
        match &mut self.kind {
            StmtKind::Seq(a, b) => {
                a.visit_mut(f);
                b.visit_mut(f);
            }
            StmtKind::If { then_branch, else_branch, .. } => {
                then_branch.visit_mut(f);
                else_branch.visit_mut(f);
            }
            StmtKind::While { body, .. } => body.visit_mut(f),
            StmtKind::Skip | StmtKind::Assign { .. } => {}
        }
    }

    fn renumber(&mut self, next: &mut u32) {
        self.loc = LocationId(*next);
        *next += 1;
        match &mut self.kind {
            StmtKind::Seq(a, b) => {
                a.renumber(next);
                b.renumber(next);
            }
            StmtKind::If { then_branch, else_branch, .. } => {
                then_branch.renumber(next);
                else_branch.renumber(next);
            }
            StmtKind::While { body, .. } => body.renumber(next),
            StmtKind::Skip | StmtKind::Assign { .. } => {}
        }
    }
}

/// A whole program: one statement tree (usually a sequence).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub body: Stmt,
}

impl Program {
    pub fn new(mut body: Stmt) -> Program {
        let mut next = 0;
        body.renumber(&mut next);
        Program { body }
    }

    /// Constructs a program from an already-labelled tree, keeping ids as-is.
    pub fn from_labelled(body: Stmt) -> Program {
        Program { body }
    }

    pub fn stmt_at(&self, loc: LocationId) -> Option<&Stmt> {
        let mut found = None;
        self.body.visit(&mut |s| {
            if s.loc == loc {
                found = Some(s);
            }
        });
        found
    }

    pub fn expr_at(&self, path: &ExprPath) -> Option<&Expr> {
        self.stmt_at(path.loc)?.expr_slot()?.descend(&path.steps)
    }

    pub fn max_loc(&self) -> LocationId {
        let mut max = LocationId(0);
        self.body.visit(&mut |s| max = max.max(s.loc));
        max
    }

    pub fn statement_count(&self) -> usize {
        let mut n = 0;
        self.body.visit(&mut |_| n += 1);
        n
    }

    /// Locations in pre-order, as stored in the tree.
    pub fn locations(&self) -> Vec<LocationId> {
        let mut out = Vec::new();
        self.body.visit(&mut |s| out.push(s.loc));
        out
    }

    /// Variables assigned anywhere in the program.
    pub fn assigned_vars(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        self.body.visit(&mut |s| {
            if let StmtKind::Assign { var, .. } = &s.kind {
                out.insert(var.clone());
            }
        });
        out
    }

    /// Every variable read or written by the program.
    pub fn all_vars(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        self.body.visit(&mut |s| {
            if let StmtKind::Assign { var, .. } = &s.kind {
                out.insert(var.clone());
            }
            if let Some(e) = s.expr_slot() {
                e.collect_vars(&mut out);
            }
        });
        out
    }
}

/// A program state: a total map from variable names to 64-bit integers.
/// Looking up an unbound variable is a runtime error, never a default.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct State {
    bindings: BTreeMap<String, i64>,
}

impl State {
    pub fn new() -> State {
        State::default()
    }

    pub fn bind(mut self, name: impl Into<String>, value: i64) -> State {
        self.bindings.insert(name.into(), value);
        self
    }

    pub fn set(&mut self, name: impl Into<String>, value: i64) {
        self.bindings.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<i64> {
        self.bindings.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i64)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<(String, i64)> for State {
    fn from_iter<T: IntoIterator<Item = (String, i64)>>(iter: T) -> State {
        State { bindings: iter.into_iter().collect() }
    }
}

/// Runtime values: integers or booleans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn ty(self) -> Ty {
        match self {
            Value::Int(_) => Ty::Int,
            Value::Bool(_) => Ty::Bool,
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Value::Int(n) => n,
            Value::Bool(_) => panic!("expected integer value in well-typed program"),
        }
    }

    pub fn as_bool(self) -> bool {
        match self {
            Value::Bool(b) => b,
            Value::Int(_) => panic!("expected boolean value in well-typed program"),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// A test: an input state plus a boolean assertion over the final state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Test {
    pub name: String,
    pub input: State,
    pub assertion: Expr,
}

impl Test {
    pub fn new(name: impl Into<String>, input: State, assertion: Expr) -> Test {
        Test { name: name.into(), input, assertion }
    }
}
