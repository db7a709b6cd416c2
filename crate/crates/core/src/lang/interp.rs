//! Big-step interpreter.
//!
//! Executions are deterministic and fuel-bounded: entering a statement
//! costs one fuel unit (a while loop pays once per iteration) and each
//! top-level expression evaluation — an assignment right-hand side or a
//! branch/loop condition — costs one more. The cost never depends on the
//! size of the expression, so programs that differ only in an expression
//! consume identical fuel as long as they follow the same path.
//!
//! Arithmetic is 64-bit signed and checked: overflow and `mod` by zero are
//! runtime errors, and a lookup of an unbound variable is an error rather
//! than a default. `mod` is the truncated-division remainder (the sign
//! follows the dividend), exactly Rust's `%`.
//!
//! The equivalence analyses observe executions through the [`Tracer`]
//! hooks; the plain entry points install a no-op tracer, so a traced run
//! and a plain run of the same program are the same computation.

use thiserror::Error;

use super::ast::{BinOp, Expr, ExprPath, LocationId, Program, State, Stmt, StmtKind, Test, Value};

/// Runtime failure modes. Any of them makes a test fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RuntimeErrorKind {
    #[error("unbound variable")]
    UnboundVariable,
    #[error("mod by zero")]
    ModByZero,
    #[error("arithmetic overflow")]
    ArithmeticOverflow,
}

/// Outcome of running a program on an input state with a fuel budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Final(State),
    RuntimeError(RuntimeErrorKind),
    FuelExhausted,
}

impl RunOutcome {
    pub fn final_state(&self) -> Option<&State> {
        match self {
            RunOutcome::Final(s) => Some(s),
            _ => None,
        }
    }
}

/// Pass/fail verdict of a test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Pass,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
        }
    }
}

/// Observation hooks for instrumented execution.
///
/// Hook order is the contract the dependency analysis relies on:
/// `on_stmt_enter` fires before any effect of the statement (in particular
/// before its expression reads), a while statement fires it once on entry
/// rather than per iteration (the point right before the loop is where an
/// insertion would run), `on_var_read` fires per variable lookup in
/// evaluation order, and `on_assign` fires after the right-hand side has
/// been evaluated but before the store is updated.
pub trait Tracer {
    /// Marked expression occurrence to observe, if any.
    fn marked_path(&self) -> Option<&ExprPath> {
        None
    }

    /// The marked occurrence finished evaluating (possibly with an error
    /// raised inside it) under state `sigma`.
    fn on_marked(&mut self, _sigma: &State, _result: &Result<Value, RuntimeErrorKind>) {}

    /// Control reached a statement, before any of its effects.
    fn on_stmt_enter(&mut self, _stmt: &Stmt, _sigma: &State) {}

    fn on_var_read(&mut self, _name: &str, _sigma: &State) {}

    /// An assignment is about to write `value` to `var`; `sigma` is the
    /// state the right-hand side was evaluated in.
    fn on_assign(&mut self, _loc: LocationId, _var: &str, _value: i64, _sigma: &State) {}
}

/// The no-op tracer used by plain execution.
pub struct NoTrace;

impl Tracer for NoTrace {}

enum Stop {
    Runtime(RuntimeErrorKind),
    Fuel,
}

fn apply_op(op: BinOp, left: Value, right: Value) -> Result<Value, RuntimeErrorKind> {
    use BinOp::*;
    let v = match op {
        Add | Sub | Mul | Mod => {
            let (a, b) = (left.as_int(), right.as_int());
            let n = match op {
                Add => a.checked_add(b).ok_or(RuntimeErrorKind::ArithmeticOverflow)?,
                Sub => a.checked_sub(b).ok_or(RuntimeErrorKind::ArithmeticOverflow)?,
                Mul => a.checked_mul(b).ok_or(RuntimeErrorKind::ArithmeticOverflow)?,
                Mod => {
                    if b == 0 {
                        return Err(RuntimeErrorKind::ModByZero);
                    }
                    a.checked_rem(b).ok_or(RuntimeErrorKind::ArithmeticOverflow)?
                }
                _ => unreachable!(),
            };
            Value::Int(n)
        }
        And => Value::Bool(left.as_bool() && right.as_bool()),
        Or => Value::Bool(left.as_bool() || right.as_bool()),
        Lt | Le | Eq | Ne | Gt | Ge => {
            let (a, b) = (left.as_int(), right.as_int());
            Value::Bool(match op {
                Lt => a < b,
                Le => a <= b,
                Eq => a == b,
                Ne => a != b,
                Gt => a > b,
                Ge => a >= b,
                _ => unreachable!(),
            })
        }
    };
    Ok(v)
}

fn eval_rec(
    e: &Expr,
    sigma: &State,
    tracer: &mut dyn Tracer,
    marked: Option<&[u8]>,
    path: &mut Vec<u8>,
) -> Result<Value, RuntimeErrorKind> {
    let result = match e {
        Expr::Var(name) => {
            tracer.on_var_read(name, sigma);
            sigma.get(name).map(Value::Int).ok_or(RuntimeErrorKind::UnboundVariable)
        }
        Expr::Num(n) => Ok(Value::Int(*n)),
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Binary { op, left, right } => {
            // both operands evaluate, left to right; no short-circuit
            path.push(0);
            let lv = eval_rec(left, sigma, tracer, marked, path);
            path.pop();
            match lv {
                Err(err) => Err(err),
                Ok(lv) => {
                    path.push(1);
                    let rv = eval_rec(right, sigma, tracer, marked, path);
                    path.pop();
                    match rv {
                        Err(err) => Err(err),
                        Ok(rv) => apply_op(*op, lv, rv),
                    }
                }
            }
        }
    };
    if marked == Some(path.as_slice()) {
        tracer.on_marked(sigma, &result);
    }
    result
}

/// Evaluates an expression under a state. Pure; no fuel is charged.
pub fn eval_expr(e: &Expr, sigma: &State) -> Result<Value, RuntimeErrorKind> {
    eval_rec(e, sigma, &mut NoTrace, None, &mut Vec::new())
}

fn eval_slot(
    stmt_loc: LocationId,
    e: &Expr,
    sigma: &State,
    tracer: &mut dyn Tracer,
) -> Result<Value, RuntimeErrorKind> {
    let marked_steps: Option<Vec<u8>> = tracer
        .marked_path()
        .filter(|p| p.loc == stmt_loc)
        .map(|p| p.steps.clone());
    eval_rec(e, sigma, tracer, marked_steps.as_deref(), &mut Vec::new())
}

fn charge(fuel: &mut u64) -> Result<(), Stop> {
    if *fuel == 0 {
        return Err(Stop::Fuel);
    }
    *fuel -= 1;
    Ok(())
}

fn exec_stmt(
    stmt: &Stmt,
    sigma: &mut State,
    fuel: &mut u64,
    tracer: &mut dyn Tracer,
) -> Result<(), Stop> {
    tracer.on_stmt_enter(stmt, sigma);
    match &stmt.kind {
        StmtKind::Skip => charge(fuel),
        StmtKind::Assign { var, rhs } => {
            charge(fuel)?;
            charge(fuel)?;
            let v = eval_slot(stmt.loc, rhs, sigma, tracer).map_err(Stop::Runtime)?;
            let n = v.as_int();
            tracer.on_assign(stmt.loc, var, n, sigma);
            sigma.set(var.clone(), n);
            Ok(())
        }
        StmtKind::Seq(a, b) => {
            charge(fuel)?;
            exec_stmt(a, sigma, fuel, tracer)?;
            exec_stmt(b, sigma, fuel, tracer)
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            charge(fuel)?;
            charge(fuel)?;
            let c = eval_slot(stmt.loc, cond, sigma, tracer).map_err(Stop::Runtime)?;
            if c.as_bool() {
                exec_stmt(then_branch, sigma, fuel, tracer)
            } else {
                exec_stmt(else_branch, sigma, fuel, tracer)
            }
        }
        StmtKind::While { cond, body } => {
            // on_stmt_enter fired once above: the insertion point before a
            // loop is passed on entry, not on every back edge. Fuel is still
            // charged per iteration.
            loop {
                charge(fuel)?;
                charge(fuel)?;
                let c = eval_slot(stmt.loc, cond, sigma, tracer).map_err(Stop::Runtime)?;
                if !c.as_bool() {
                    return Ok(());
                }
                exec_stmt(body, sigma, fuel, tracer)?;
            }
        }
    }
}

/// Runs a program under the given tracer.
pub fn exec_traced(p: &Program, input: &State, fuel: u64, tracer: &mut dyn Tracer) -> RunOutcome {
    let mut sigma = input.clone();
    let mut budget = fuel;
    match exec_stmt(&p.body, &mut sigma, &mut budget, tracer) {
        Ok(()) => RunOutcome::Final(sigma),
        Err(Stop::Runtime(kind)) => RunOutcome::RuntimeError(kind),
        Err(Stop::Fuel) => RunOutcome::FuelExhausted,
    }
}

/// Runs a program on an input state with a fuel budget.
pub fn exec(p: &Program, input: &State, fuel: u64) -> RunOutcome {
    exec_traced(p, input, fuel, &mut NoTrace)
}

/// Runs a test: pass iff execution reaches a final state and the assertion
/// holds there. Runtime errors, fuel exhaustion and a false (or erroring)
/// assertion all fail.
pub fn run_test(p: &Program, test: &Test, fuel: u64) -> Verdict {
    match exec(p, &test.input, fuel) {
        RunOutcome::Final(sigma) => match eval_expr(&test.assertion, &sigma) {
            Ok(Value::Bool(true)) => Verdict::Pass,
            _ => Verdict::Fail,
        },
        _ => Verdict::Fail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::{parse_expr, parse_program};

    fn state(pairs: &[(&str, i64)]) -> State {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    const LOOP_FIXED: &str =
        "while i > 0 do if (i mod 2) = 1 then c := c + 1 else skip fi ; i := i - 1 od";

    #[test]
    fn expression_evaluation_examples() {
        let sigma = state(&[("i", 4), ("c", 0)]);
        assert_eq!(eval_expr(&parse_expr("i >= 0").unwrap(), &sigma), Ok(Value::Bool(true)));
        assert_eq!(
            eval_expr(&parse_expr("(i mod 2) = 1").unwrap(), &sigma),
            Ok(Value::Bool(false))
        );
        assert_eq!(eval_expr(&Expr::Num(42), &sigma), Ok(Value::Int(42)));
    }

    #[test]
    fn evaluation_errors() {
        let sigma = state(&[("x", 5)]);
        assert_eq!(
            eval_expr(&parse_expr("y + 1").unwrap(), &sigma),
            Err(RuntimeErrorKind::UnboundVariable)
        );
        assert_eq!(
            eval_expr(&parse_expr("x mod (x - 5)").unwrap(), &sigma),
            Err(RuntimeErrorKind::ModByZero)
        );
        let big = state(&[("x", i64::MAX)]);
        assert_eq!(
            eval_expr(&parse_expr("x + 1").unwrap(), &big),
            Err(RuntimeErrorKind::ArithmeticOverflow)
        );
    }

    #[test]
    fn mod_sign_follows_dividend() {
        let sigma = state(&[("a", -7), ("b", 3)]);
        assert_eq!(eval_expr(&parse_expr("a mod b").unwrap(), &sigma), Ok(Value::Int(-1)));
        let sigma = state(&[("a", 7), ("b", -3)]);
        assert_eq!(eval_expr(&parse_expr("a mod b").unwrap(), &sigma), Ok(Value::Int(1)));
    }

    #[test]
    fn loop_counts_odd_numbers() {
        let p = parse_program(LOOP_FIXED).unwrap();
        let out = exec(&p, &state(&[("i", 4), ("c", 0)]), 10_000);
        assert_eq!(out, RunOutcome::Final(state(&[("i", 0), ("c", 2)])));
    }

    #[test]
    fn skip_is_identity() {
        let p = parse_program("skip").unwrap();
        let sigma = state(&[("q", 9)]);
        assert_eq!(exec(&p, &sigma, 1), RunOutcome::Final(sigma));
    }

    #[test]
    fn divergence_exhausts_fuel() {
        let p = parse_program("while true do skip od").unwrap();
        assert_eq!(exec(&p, &State::new(), 100), RunOutcome::FuelExhausted);
    }

    #[test]
    fn fuel_monotonicity_on_the_loop() {
        let p = parse_program(LOOP_FIXED).unwrap();
        let input = state(&[("i", 4), ("c", 0)]);
        let mut minimal = None;
        for fuel in 1..200 {
            if let RunOutcome::Final(s) = exec(&p, &input, fuel) {
                minimal = Some((fuel, s));
                break;
            }
        }
        let (fuel, s) = minimal.expect("loop terminates well within 200 steps");
        for extra in [0, 1, 10, 100_000] {
            assert_eq!(exec(&p, &input, fuel + extra), RunOutcome::Final(s.clone()));
        }
    }

    #[test]
    fn test_verdicts() {
        let t = Test::new("t", state(&[("i", 4), ("c", 0)]), parse_expr("c = 2").unwrap());
        let fixed = parse_program(LOOP_FIXED).unwrap();
        assert_eq!(run_test(&fixed, &t, 10_000), Verdict::Pass);

        let buggy = parse_program(&LOOP_FIXED.replace("(i mod 2) = 1", "i > 1")).unwrap();
        assert_eq!(run_test(&buggy, &t, 10_000), Verdict::Fail);

        let diverging = parse_program("while i > 0 do c := c + 1 od").unwrap();
        assert_eq!(run_test(&diverging, &t, 10_000), Verdict::Fail);
    }

    #[test]
    fn assign_charges_statement_and_evaluation() {
        let p = parse_program("x := 1").unwrap();
        assert_eq!(exec(&p, &State::new(), 1), RunOutcome::FuelExhausted);
        assert_eq!(exec(&p, &State::new(), 2), RunOutcome::Final(state(&[("x", 1)])));
    }
}
