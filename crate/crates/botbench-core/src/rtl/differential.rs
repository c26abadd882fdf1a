//! Differential suite: the satisfaction-vector evaluator against the
//! quantifier-expansion oracle, on randomized formulas and traces.

use super::*;
use crate::seed::SeedStream;
use crate::testkit::{eval_ltl_naive, random_formula, random_state_formula, random_trace};

#[test]
fn agrees_with_quantifier_expansion_oracle() {
    let mut stream = SeedStream::new(0x0ddba11);
    for case in 0..10_000u32 {
        let formula = random_formula(&mut stream, 4);
        let trace = random_trace(&mut stream);
        for index in 0..=trace.elements.len() {
            let fast = eval_ltl(&formula, &trace, index);
            let naive = eval_ltl_naive(&formula, &trace, index);
            assert_eq!(
                fast, naive,
                "case {case}: disagreement at index {index} on {formula} over {} elements",
                trace.elements.len()
            );
        }
    }
}

#[test]
fn eventually_is_monotone_under_trace_extension() {
    let mut stream = SeedStream::new(0xf00d);
    let mut checked = 0;
    while checked < 2_000 {
        let formula = LtlFormula::eventually(random_state_formula(&mut stream, 2));
        let extended = random_trace(&mut stream);
        if extended.elements.is_empty() {
            continue;
        }
        let mut shorter = extended.clone();
        shorter.elements.pop();
        if eval_ltl(&formula, &shorter, 0) {
            assert!(
                eval_ltl(&formula, &extended, 0),
                "F-monotonicity violated by {formula}"
            );
        }
        checked += 1;
    }
}

#[test]
fn always_is_antitone_under_trace_extension() {
    let mut stream = SeedStream::new(0xbeef);
    let mut checked = 0;
    while checked < 2_000 {
        let formula = LtlFormula::always(random_state_formula(&mut stream, 2));
        let extended = random_trace(&mut stream);
        if extended.elements.is_empty() {
            continue;
        }
        let mut shorter = extended.clone();
        shorter.elements.pop();
        if !eval_ltl(&formula, &shorter, 0) {
            assert!(
                !eval_ltl(&formula, &extended, 0),
                "G-antitonicity violated by {formula}"
            );
        }
        checked += 1;
    }
}

#[test]
fn not_eventually_equals_always_not() {
    let mut stream = SeedStream::new(0xd0a1);
    for _ in 0..2_000 {
        let phi = random_formula(&mut stream, 3);
        let trace = random_trace(&mut stream);
        for index in 0..=trace.elements.len() {
            let lhs = eval_ltl(
                &LtlFormula::not(LtlFormula::eventually(phi.clone())),
                &trace,
                index,
            );
            let rhs = eval_ltl(
                &LtlFormula::always(LtlFormula::not(phi.clone())),
                &trace,
                index,
            );
            assert_eq!(lhs, rhs, "duality violated by {phi} at {index}");
        }
    }
}
