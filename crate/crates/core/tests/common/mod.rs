//! Proptest generators shared by the core property suites.

use proptest::prelude::*;

use imprepair::lang::{BinOp, Expr, Program, State, Stmt, StmtKind};

pub const VARS: [&str; 4] = ["a", "b", "c", "i"];

pub fn arb_var() -> impl Strategy<Value = String> {
    prop::sample::select(VARS.as_slice()).prop_map(str::to_string)
}

pub fn arb_aop() -> impl Strategy<Value = BinOp> {
    prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Mod])
}

pub fn arb_rop() -> impl Strategy<Value = BinOp> {
    prop::sample::select(vec![BinOp::Lt, BinOp::Le, BinOp::Eq, BinOp::Ne, BinOp::Gt, BinOp::Ge])
}

pub fn arb_bop() -> impl Strategy<Value = BinOp> {
    prop::sample::select(vec![BinOp::And, BinOp::Or])
}

pub fn arb_aexpr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        arb_var().prop_map(Expr::Var),
        (-4i64..10).prop_map(Expr::Num),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        (arb_aop(), inner.clone(), inner).prop_map(|(op, l, r)| Expr::binary(op, l, r))
    })
}

pub fn arb_bexpr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(Expr::Bool),
        (arb_rop(), arb_aexpr(), arb_aexpr()).prop_map(|(op, l, r)| Expr::binary(op, l, r)),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        (arb_bop(), inner.clone(), inner).prop_map(|(op, l, r)| Expr::binary(op, l, r))
    })
}

/// Rotates sequence nodes to the right, the shape the parser produces.
/// The concrete syntax has no statement grouping, so only right-folded
/// trees are in the parser's image.
pub fn right_fold(stmt: Stmt) -> Stmt {
    let kind = match stmt.kind {
        StmtKind::Seq(a, b) => {
            let a = right_fold(*a);
            let b = right_fold(*b);
            match a.kind {
                StmtKind::Seq(a1, a2) => {
                    let rest = right_fold(Stmt::new(StmtKind::Seq(a2, Box::new(b))));
                    StmtKind::Seq(a1, Box::new(rest))
                }
                other => StmtKind::Seq(Box::new(Stmt::new(other)), Box::new(b)),
            }
        }
        StmtKind::If { cond, then_branch, else_branch } => StmtKind::If {
            cond,
            then_branch: Box::new(right_fold(*then_branch)),
            else_branch: Box::new(right_fold(*else_branch)),
        },
        StmtKind::While { cond, body } => {
            StmtKind::While { cond, body: Box::new(right_fold(*body)) }
        }
        other => other,
    };
    Stmt::new(kind)
}

/// Statements without ids; wrap with `Program::new` to label them.
pub fn arb_stmt() -> impl Strategy<Value = Stmt> {
    let leaf = prop_oneof![
        3 => (arb_var(), arb_aexpr())
            .prop_map(|(var, rhs)| Stmt::new(StmtKind::Assign { var, rhs })),
        1 => Just(Stmt::new(StmtKind::Skip)),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            3 => (inner.clone(), inner.clone()).prop_map(|(a, b)| {
                Stmt::new(StmtKind::Seq(Box::new(a), Box::new(b)))
            }),
            2 => (arb_bexpr(), inner.clone(), inner.clone()).prop_map(|(cond, t, e)| {
                Stmt::new(StmtKind::If {
                    cond,
                    then_branch: Box::new(t),
                    else_branch: Box::new(e),
                })
            }),
            1 => (arb_bexpr(), inner).prop_map(|(cond, body)| {
                Stmt::new(StmtKind::While { cond, body: Box::new(body) })
            }),
        ]
    })
}

pub fn arb_program() -> impl Strategy<Value = Program> {
    arb_stmt().prop_map(|s| Program::new(right_fold(s)))
}

/// A state binding every generator variable, so no run trips over an
/// unbound name.
pub fn arb_state() -> impl Strategy<Value = State> {
    prop::collection::vec(-4i64..10, VARS.len()).prop_map(|vals| {
        VARS.iter().map(|v| v.to_string()).zip(vals).collect()
    })
}
