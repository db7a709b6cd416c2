//! Canonical printing.
//!
//! `print_program` is the inverse of the parser on freshly parsed programs:
//! re-parsing its output reproduces the identical tree, including statement
//! ids. Expressions print with minimal parentheses; every operator level is
//! left-associative, so a right child at the same precedence level keeps its
//! parentheses while a left child drops them.

use std::fmt;

use super::ast::{BinOp, Expr, Program, Stmt, StmtKind};

fn precedence(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Lt | BinOp::Le | BinOp::Eq | BinOp::Ne | BinOp::Gt | BinOp::Ge => 3,
        BinOp::Add | BinOp::Sub => 4,
        BinOp::Mul | BinOp::Mod => 5,
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, parent: u8, is_right: bool) -> fmt::Result {
    match e {
        Expr::Var(name) => write!(f, "{name}"),
        Expr::Num(n) => write!(f, "{n}"),
        Expr::Bool(b) => write!(f, "{b}"),
        Expr::Binary { op, left, right } => {
            let prec = precedence(*op);
            let needs_parens = prec < parent || (prec == parent && is_right);
            if needs_parens {
                write!(f, "(")?;
            }
            write_expr(f, left, prec, false)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, right, prec, true)?;
            if needs_parens {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0, false)
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn print_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    match &stmt.kind {
        StmtKind::Skip => {
            indent(out, depth);
            out.push_str("skip");
        }
        StmtKind::Assign { var, rhs } => {
            indent(out, depth);
            out.push_str(var);
            out.push_str(" := ");
            out.push_str(&rhs.to_string());
        }
        StmtKind::Seq(a, b) => {
            print_stmt(out, a, depth);
            out.push_str(" ;\n");
            print_stmt(out, b, depth);
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            indent(out, depth);
            out.push_str("if ");
            out.push_str(&cond.to_string());
            out.push_str(" then\n");
            print_stmt(out, then_branch, depth + 1);
            out.push('\n');
            indent(out, depth);
            out.push_str("else\n");
            print_stmt(out, else_branch, depth + 1);
            out.push('\n');
            indent(out, depth);
            out.push_str("fi");
        }
        StmtKind::While { cond, body } => {
            indent(out, depth);
            out.push_str("while ");
            out.push_str(&cond.to_string());
            out.push_str(" do\n");
            print_stmt(out, body, depth + 1);
            out.push('\n');
            indent(out, depth);
            out.push_str("od");
        }
    }
}

/// Canonical multi-line rendering of a program.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    print_stmt(&mut out, &p.body, 0);
    out
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_program(self))
    }
}
