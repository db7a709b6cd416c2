//! Independent reference interpreter used as a test oracle.
//!
//! Re-implements the language semantics from scratch — recursive
//! evaluation with 128-bit intermediate arithmetic, its own fuel
//! bookkeeping — and records what one expression occurrence evaluates to,
//! in order. It never calls the library's interpreter or analyses, so
//! agreement between the two is meaningful evidence.

use imprepair::lang::{BinOp, Expr, ExprPath, Program, State, Stmt, StmtKind, Value};

/// Whole-run result tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tag {
    Fin(State),
    Fault,
    Fuel,
}

/// Observation log of one run: what the marked occurrence evaluated to
/// (or that it faulted), plus how the run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observations {
    pub entries: Vec<Result<Value, ()>>,
    pub outcome: Tag,
    /// True when the run's fault was raised inside the marked occurrence.
    pub faulted_in_marked: bool,
}

struct Stop;

fn fits(n: i128) -> Result<i64, ()> {
    i64::try_from(n).map_err(|_| ())
}

struct Ctx<'a> {
    marked_loc: imprepair::lang::LocationId,
    marked_steps: &'a [u8],
    log: Vec<Result<Value, ()>>,
}

fn o_eval(
    e: &Expr,
    sig: &State,
    observe_here: Option<&[u8]>,
    here: &mut Vec<u8>,
    log: &mut Vec<Result<Value, ()>>,
) -> Result<Value, ()> {
    let result = match e {
        Expr::Num(n) => Ok(Value::Int(*n)),
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Var(name) => sig.get(name).map(Value::Int).ok_or(()),
        Expr::Binary { op, left, right } => {
            here.push(0);
            let l = o_eval(left, sig, observe_here, here, log);
            here.pop();
            match l {
                Err(()) => Err(()),
                Ok(l) => {
                    here.push(1);
                    let r = o_eval(right, sig, observe_here, here, log);
                    here.pop();
                    match r {
                        Err(()) => Err(()),
                        Ok(r) => o_apply(*op, l, r),
                    }
                }
            }
        }
    };
    if observe_here == Some(here.as_slice()) {
        log.push(result.clone().map_err(|_| ()));
    }
    result
}

fn o_apply(op: BinOp, l: Value, r: Value) -> Result<Value, ()> {
    use BinOp::*;
    Ok(match op {
        Add | Sub | Mul => {
            let (Value::Int(a), Value::Int(b)) = (l, r) else { return Err(()) };
            let (a, b) = (a as i128, b as i128);
            let wide = match op {
                Add => a + b,
                Sub => a - b,
                Mul => a * b,
                _ => unreachable!(),
            };
            Value::Int(fits(wide)?)
        }
        Mod => {
            let (Value::Int(a), Value::Int(b)) = (l, r) else { return Err(()) };
            if b == 0 || (a == i64::MIN && b == -1) {
                return Err(());
            }
            Value::Int(a % b)
        }
        And => {
            let (Value::Bool(a), Value::Bool(b)) = (l, r) else { return Err(()) };
            Value::Bool(a && b)
        }
        Or => {
            let (Value::Bool(a), Value::Bool(b)) = (l, r) else { return Err(()) };
            Value::Bool(a || b)
        }
        Lt | Le | Eq | Ne | Gt | Ge => {
            let (Value::Int(a), Value::Int(b)) = (l, r) else { return Err(()) };
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
    })
}

fn use_fuel(fuel: &mut u64, units: u64) -> Result<(), Stop> {
    if *fuel < units {
        Err(Stop)
    } else {
        *fuel -= units;
        Ok(())
    }
}

enum Died {
    Fault,
    OutOfFuel,
}

fn o_slot(
    stmt: &Stmt,
    slot: &Expr,
    sig: &State,
    ctx: &mut Ctx<'_>,
) -> Result<Value, Died> {
    let observe_here = (stmt.loc == ctx.marked_loc).then_some(ctx.marked_steps);
    o_eval(slot, sig, observe_here, &mut Vec::new(), &mut ctx.log).map_err(|_| Died::Fault)
}

fn o_stmt(stmt: &Stmt, sig: &mut State, fuel: &mut u64, ctx: &mut Ctx<'_>) -> Result<(), Died> {
    match &stmt.kind {
        StmtKind::Skip => use_fuel(fuel, 1).map_err(|_| Died::OutOfFuel),
        StmtKind::Assign { var, rhs } => {
            use_fuel(fuel, 2).map_err(|_| Died::OutOfFuel)?;
            match o_slot(stmt, rhs, sig, ctx)? {
                Value::Int(n) => {
                    sig.set(var.clone(), n);
                    Ok(())
                }
                Value::Bool(_) => Err(Died::Fault),
            }
        }
        StmtKind::Seq(a, b) => {
            use_fuel(fuel, 1).map_err(|_| Died::OutOfFuel)?;
            o_stmt(a, sig, fuel, ctx)?;
            o_stmt(b, sig, fuel, ctx)
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            use_fuel(fuel, 2).map_err(|_| Died::OutOfFuel)?;
            match o_slot(stmt, cond, sig, ctx)? {
                Value::Bool(true) => o_stmt(then_branch, sig, fuel, ctx),
                Value::Bool(false) => o_stmt(else_branch, sig, fuel, ctx),
                Value::Int(_) => Err(Died::Fault),
            }
        }
        StmtKind::While { cond, body } => loop {
            use_fuel(fuel, 2).map_err(|_| Died::OutOfFuel)?;
            match o_slot(stmt, cond, sig, ctx)? {
                Value::Bool(true) => o_stmt(body, sig, fuel, ctx)?,
                Value::Bool(false) => return Ok(()),
                Value::Int(_) => return Err(Died::Fault),
            }
        },
    }
}

/// Runs `p` on `input`, logging the marked occurrence's values.
pub fn observe(p: &Program, input: &State, marked: &ExprPath, fuel: u64) -> Observations {
    let mut sig = input.clone();
    let mut budget = fuel;
    let mut ctx = Ctx { marked_loc: marked.loc, marked_steps: &marked.steps, log: Vec::new() };
    let outcome = match o_stmt(&p.body, &mut sig, &mut budget, &mut ctx) {
        Ok(()) => Tag::Fin(sig),
        Err(Died::Fault) => Tag::Fault,
        Err(Died::OutOfFuel) => Tag::Fuel,
    };
    let faulted_in_marked =
        outcome == Tag::Fault && matches!(ctx.log.last(), Some(Err(())));
    Observations { entries: ctx.log, outcome, faulted_in_marked }
}
