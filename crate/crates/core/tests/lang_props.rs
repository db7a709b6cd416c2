//! Language-level properties: printing round-trips, execution determinism,
//! fuel monotonicity, and typing preservation.

mod common;

use common::{arb_aexpr, arb_bexpr, arb_program, arb_state, arb_stmt};
use proptest::prelude::*;

use imprepair::lang::{
    eval_expr, exec, parse_expr, parse_program, print_program, Program, RunOutcome, Ty,
};

proptest! {
    #[test]
    fn program_roundtrip_preserves_tree_and_ids(p in arb_program()) {
        let text = print_program(&p);
        let reparsed = parse_program(&text).unwrap();
        prop_assert_eq!(&reparsed, &p);
        prop_assert_eq!(print_program(&reparsed), text);
    }

    /// Trees outside the parser's image (left-nested sequences arise from
    /// patch application) still print to a stable fixed point.
    #[test]
    fn printing_any_tree_is_stable(s in arb_stmt()) {
        let p = Program::new(s);
        let text = print_program(&p);
        let reparsed = parse_program(&text).unwrap();
        prop_assert_eq!(print_program(&reparsed), text);
    }

    #[test]
    fn expr_roundtrip_with_minimal_parens(e in arb_bexpr()) {
        let text = e.to_string();
        prop_assert_eq!(parse_expr(&text).unwrap(), e);
    }

    #[test]
    fn arith_expr_roundtrip(e in arb_aexpr()) {
        let text = e.to_string();
        prop_assert_eq!(parse_expr(&text).unwrap(), e);
    }

    #[test]
    fn execution_is_deterministic(p in arb_program(), sigma in arb_state()) {
        prop_assert_eq!(exec(&p, &sigma, 2_000), exec(&p, &sigma, 2_000));
    }

    #[test]
    fn fuel_monotonicity(p in arb_program(), sigma in arb_state()) {
        if let RunOutcome::Final(out) = exec(&p, &sigma, 1_000) {
            for fuel in [1_001u64, 2_000, 100_000] {
                prop_assert_eq!(exec(&p, &sigma, fuel), RunOutcome::Final(out.clone()));
            }
        }
    }

    #[test]
    fn boolean_expressions_never_evaluate_to_integers(e in arb_bexpr(), sigma in arb_state()) {
        prop_assert_eq!(e.ty().unwrap(), Ty::Bool);
        if let Ok(v) = eval_expr(&e, &sigma) {
            prop_assert_eq!(v.ty(), Ty::Bool);
        }
    }

    #[test]
    fn arithmetic_expressions_never_evaluate_to_booleans(e in arb_aexpr(), sigma in arb_state()) {
        prop_assert_eq!(e.ty().unwrap(), Ty::Int);
        if let Ok(v) = eval_expr(&e, &sigma) {
            prop_assert_eq!(v.ty(), Ty::Int);
        }
    }
}
