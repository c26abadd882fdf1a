//! Differential suite: interpreter expression semantics against the
//! independent reference evaluator, over randomly generated expressions.
//!
//! Each expression is wrapped in `v = <expr>; say(str([v]))` and run through
//! the full pipeline; the single-element list forces repr rendering so
//! values of different types never collide textually.

use crate::seed::SeedStream;
use crate::sim::{simulate, SimulationOutcome};
use crate::testkit::{eval_ref, random_expr, ref_repr, render_expr, RefError};
use crate::world::WorldState;

use super::{InterpreterErrorKind, SourceProgram};

fn tiny_world() -> WorldState {
    WorldState {
        rooms: vec!["room".to_string()],
        object_locations: Default::default(),
        pickable: Default::default(),
        persons: Vec::new(),
        robot_start: "room".to_string(),
    }
}

fn expected_kind(err: RefError) -> InterpreterErrorKind {
    match err {
        RefError::Type => InterpreterErrorKind::Type,
        RefError::Value => InterpreterErrorKind::Value,
        RefError::ZeroDivision => InterpreterErrorKind::ZeroDivision,
        RefError::Index => InterpreterErrorKind::Index,
    }
}

#[test]
fn interpreter_matches_reference_evaluator_on_random_expressions() {
    let world = tiny_world();
    let mut stream = SeedStream::new(0x5eed);
    let mut value_cases = 0u32;
    let mut error_cases = 0u32;
    for case in 0..6_000u32 {
        let expr = random_expr(&mut stream, 4);
        let text = render_expr(&expr);
        let program = SourceProgram::new(format!("v = {text}\nsay(str([v]))\n"), "differential");
        let result = simulate(&program, &world, 1_000_000);
        match eval_ref(&expr) {
            Ok(value) => {
                value_cases += 1;
                let expected = format!("[{}]", ref_repr(&value));
                match &result.outcome {
                    SimulationOutcome::Success => {
                        let said = result.trace.elements.last().unwrap().args[0].render();
                        assert_eq!(
                            said, expected,
                            "case {case}: value mismatch for {text}"
                        );
                    }
                    other => panic!("case {case}: expected {expected} for {text}, got {other:?}"),
                }
            }
            Err(err) => {
                error_cases += 1;
                match &result.outcome {
                    SimulationOutcome::PythonError(e) => {
                        assert_eq!(
                            e.kind,
                            expected_kind(err),
                            "case {case}: error kind mismatch for {text} ({})",
                            e.message
                        );
                    }
                    other => panic!(
                        "case {case}: expected {err:?} for {text}, got {other:?}"
                    ),
                }
            }
        }
    }
    // The generator must exercise both outcomes heavily.
    assert!(value_cases > 1_000, "too few value cases: {value_cases}");
    assert!(error_cases > 1_000, "too few error cases: {error_cases}");
}

#[test]
fn precedence_against_frozen_reference_values() {
    // Verified by hand against the reference semantics of the language
    // family; these pin parser precedence, which full parenthesization in
    // the random suite cannot see.
    let cases: &[(&str, &str)] = &[
        ("1 + 2 * 3", "7"),
        ("(1 + 2) * 3", "9"),
        ("2 ** 3 ** 2", "512"),
        ("-2 ** 2", "-4"),
        ("(-2) ** 2", "4"),
        ("2 * 3 ** 2", "18"),
        ("10 - 4 - 3", "3"),
        ("100 / 10 / 5", "2.0"),
        ("7 // 2 % 2", "1"),
        ("1 + 2 < 4", "True"),
        ("not 1 == 2", "True"),
        ("not True and False", "False"),
        ("True or False and False", "True"),
        ("1 < 2 < 3", "True"),
        ("3 > 2 > 2", "False"),
        ("1 if 2 > 1 else 0", "1"),
        ("'ab' * 2 + 'c'", "'ababc'"),
        ("[1] + [2, 3]", "[1, 2, 3]"),
        ("'b' in 'abc'", "True"),
        ("2 in [1, 2] and 3 not in [1, 2]", "True"),
        ("len('abc') + len([1, 2])", "5"),
        ("str(1.5)", "'1.5'"),
        ("int('42') + 1", "43"),
        ("min(3, 1 + 1)", "2"),
        ("max([1, 5, 3])", "5"),
        ("sum([1, 2, 3], 10)", "16"),
        ("sorted([3, 1, 2])", "[1, 2, 3]"),
        ("sorted(['b', 'a'])[0]", "'a'"),
        ("-7 // 2", "-4"),
        ("-7 % 3", "2"),
        ("7 % -3", "-2"),
        ("True + True", "2"),
        ("1 == 1.0", "True"),
        ("'abc'[-1]", "'c'"),
        ("[10, 20][1]", "20"),
    ];
    let world = tiny_world();
    for (expr, expected_repr) in cases {
        let program = SourceProgram::new(format!("v = {expr}\nsay(str([v]))\n"), "precedence");
        let result = simulate(&program, &world, 100_000);
        match &result.outcome {
            SimulationOutcome::Success => {
                let said = result.trace.elements.last().unwrap().args[0].render();
                assert_eq!(said, format!("[{expected_repr}]"), "for {expr}");
            }
            other => panic!("{expr} failed: {other:?}"),
        }
    }
}

#[test]
fn step_budget_boundary_is_exact() {
    // A program of k statements costs 2k steps (statement + literal node):
    // budget 2k completes, budget 2k-1 times out on the final node.
    let world = tiny_world();
    let body = "x = 1\n".repeat(50);
    let program = SourceProgram::new(body, "budget");
    let exact = simulate(&program, &world, 100);
    assert!(exact.outcome.is_success());
    let short = simulate(&program, &world, 99);
    match &short.outcome {
        SimulationOutcome::PythonError(e) => {
            assert_eq!(e.kind, InterpreterErrorKind::Timeout);
            assert_eq!(e.span.line, 50);
        }
        other => panic!("unexpected outcome: {other:?}"),
    }
}
