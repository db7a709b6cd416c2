//! The subject language: syntax, canonical text format and the reference
//! interpreter that runs tests.

pub mod ast;
pub mod interp;
pub mod parser;
pub mod printer;

pub use ast::{
    BinOp, Expr, ExprPath, LocationId, Program, State, Stmt, StmtKind, Test, Ty, TypeError, Value,
};
pub use interp::{
    eval_expr, exec, exec_traced, run_test, NoTrace, RunOutcome, RuntimeErrorKind, Tracer, Verdict,
};
pub use parser::{parse_expr, parse_program, ParseError};
pub use printer::print_program;
