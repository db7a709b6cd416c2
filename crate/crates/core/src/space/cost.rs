//! Patch cost: the number of AST nodes a patch adds, modifies or deletes
//! relative to the base program. The search minimizes (cost, serialization),
//! so equal-cost patches resolve to the lexicographically smallest form.

use std::collections::BTreeMap;

use ordered_float::NotNan;

use crate::lang::{Expr, Program};

use super::patch::Patch;

pub type Cost = NotNan<f64>;

pub fn cost_value(v: f64) -> Cost {
    NotNan::new(v).expect("cost must not be NaN")
}

/// Size of the largest common top-down prefix tree of two expressions:
/// matching nodes from the root downward, stopping at the first mismatch
/// on each branch.
fn common_prefix(a: &Expr, b: &Expr) -> usize {
    match (a, b) {
        (Expr::Var(x), Expr::Var(y)) if x == y => 1,
        (Expr::Num(x), Expr::Num(y)) if x == y => 1,
        (Expr::Bool(x), Expr::Bool(y)) if x == y => 1,
        (
            Expr::Binary { op: op_a, left: la, right: ra },
            Expr::Binary { op: op_b, left: lb, right: rb },
        ) if op_a == op_b => 1 + common_prefix(la, lb) + common_prefix(ra, rb),
        _ => 0,
    }
}

/// The default cost of a patch against its base program:
///
/// * replacement — nodes removed plus nodes added, discounting the shared
///   top-down prefix on both sides;
/// * refinement — the new connective node plus the appended expression;
/// * guard — the if/else/skip scaffold (3 nodes) plus the condition;
/// * insertion — the assignment node and its variable leaf plus the
///   right-hand side.
pub fn ast_distance(patch: &Patch, base: &Program) -> Cost {
    let n = match patch {
        Patch::ReplaceExpr { path, new } => {
            let old = base
                .expr_at(path)
                .unwrap_or_else(|| panic!("anchor {path} missing from the base program"));
            old.node_count() + new.node_count() - 2 * common_prefix(old, new)
        }
        Patch::Refine { new, .. } => 1 + new.node_count(),
        Patch::Guard { cond, .. } => 3 + cond.node_count(),
        Patch::InsertAssign { rhs, .. } => 2 + rhs.node_count(),
    };
    cost_value(n as f64)
}

/// Cost function used to order the search. The table variant serves
/// defect bundles that pin explicit per-patch costs; patches absent from
/// the table fall back to the AST distance.
#[derive(Debug, Clone, Default)]
pub enum CostFn {
    #[default]
    AstDistance,
    Table(BTreeMap<String, Cost>),
}

impl CostFn {
    pub fn cost(&self, patch: &Patch, base: &Program) -> Cost {
        match self {
            CostFn::AstDistance => ast_distance(patch, base),
            CostFn::Table(table) => table
                .get(&patch.serialize())
                .copied()
                .unwrap_or_else(|| ast_distance(patch, base)),
        }
    }

    /// The strict total order the search explores in.
    pub fn key(&self, patch: &Patch, base: &Program) -> (Cost, String) {
        (self.cost(patch, base), patch.serialize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_expr, parse_program, ExprPath, LocationId};
    use crate::space::patch::Connective;

    #[test]
    fn refinement_cost_counts_connective_plus_new() {
        let base = parse_program("if i > 0 then skip else skip fi").unwrap();
        let patch = Patch::Refine {
            path: ExprPath::slot(LocationId(0)),
            connective: Connective::And,
            new: parse_expr("x = 0").unwrap(),
        };
        assert_eq!(ast_distance(&patch, &base), cost_value(4.0));
    }

    #[test]
    fn replacement_with_different_operator_shares_no_prefix() {
        let base = parse_program("if i > 0 then skip else skip fi").unwrap();
        let patch = Patch::ReplaceExpr {
            path: ExprPath::slot(LocationId(0)),
            new: parse_expr("i >= 0").unwrap(),
        };
        assert_eq!(ast_distance(&patch, &base), cost_value(6.0));
    }

    #[test]
    fn replacement_discounts_the_shared_prefix() {
        let base = parse_program("if i > 0 then skip else skip fi").unwrap();
        // i > 0 vs i > 2: root and left leaf match (prefix 2)
        let patch = Patch::ReplaceExpr {
            path: ExprPath::slot(LocationId(0)),
            new: parse_expr("i > 2").unwrap(),
        };
        assert_eq!(ast_distance(&patch, &base), cost_value(2.0));
    }

    #[test]
    fn guard_and_insert_costs() {
        let base = parse_program("c := c + 1").unwrap();
        let guard = Patch::Guard { loc: LocationId(0), cond: parse_expr("i > 0").unwrap() };
        assert_eq!(ast_distance(&guard, &base), cost_value(6.0));
        let insert = Patch::InsertAssign {
            loc: LocationId(0),
            var: "f".into(),
            rhs: parse_expr("n").unwrap(),
        };
        assert_eq!(ast_distance(&insert, &base), cost_value(3.0));
    }

    #[test]
    fn table_overrides_with_fallback() {
        let base = parse_program("if i > 0 then skip else skip fi").unwrap();
        let patch = Patch::ReplaceExpr {
            path: ExprPath::slot(LocationId(0)),
            new: parse_expr("i >= 0").unwrap(),
        };
        let mut table = BTreeMap::new();
        table.insert(patch.serialize(), cost_value(0.1));
        let f = CostFn::Table(table);
        assert_eq!(f.cost(&patch, &base), cost_value(0.1));
        let other = Patch::ReplaceExpr {
            path: ExprPath::slot(LocationId(0)),
            new: parse_expr("i > 2").unwrap(),
        };
        assert_eq!(f.cost(&other, &base), cost_value(2.0));
    }
}
