//! Behavioral tests of the interpreter through the full pipeline: builtins,
//! string and list methods, scoping, and the named edge cases.

use botbench_core::lang::{InterpreterErrorKind, SourceProgram};
use botbench_core::sim::{simulate, SimulationOutcome};
use botbench_core::world::WorldState;

fn world() -> WorldState {
    WorldState {
        rooms: vec!["room".to_string()],
        object_locations: Default::default(),
        pickable: Default::default(),
        persons: Vec::new(),
        robot_start: "room".to_string(),
    }
}

/// Runs a program that must end with a `say` and returns the said text.
fn says(program: &str) -> String {
    let result = simulate(
        &SourceProgram::new(program, "interp-test"),
        &world(),
        200_000,
    );
    match &result.outcome {
        SimulationOutcome::Success => result
            .trace
            .elements
            .last()
            .expect("program said something")
            .args[0]
            .render(),
        other => panic!("program failed: {other:?}\n{program}"),
    }
}

fn fails_with(program: &str, kind: InterpreterErrorKind) {
    let result = simulate(
        &SourceProgram::new(program, "interp-test"),
        &world(),
        200_000,
    );
    match &result.outcome {
        SimulationOutcome::PythonError(e) => {
            assert_eq!(e.kind, kind, "{program}: {}", e.message)
        }
        other => panic!("expected {kind:?}, got {other:?}\n{program}"),
    }
}

#[test]
fn string_methods() {
    assert_eq!(says("say('MiXeD'.lower())"), "mixed");
    assert_eq!(says("say('MiXeD'.upper())"), "MIXED");
    assert_eq!(says("say('  pad  '.strip())"), "pad");
    assert_eq!(says("say('xxpadxx'.strip('x'))"), "pad");
    assert_eq!(says("say('a,b,,c'.split(',')[2])"), "");
    assert_eq!(says("say(str(len('a b  c'.split())))"), "3");
    assert_eq!(says("say('-'.join(['a', 'b', 'c']))"), "a-b-c");
    assert_eq!(says("say(str('conference room A'.startswith('conference')))"), "True");
    assert_eq!(says("say(str('report.csv'.endswith('.csv')))"), "True");
    assert_eq!(says("say('a-b-a'.replace('a', 'z'))"), "z-b-z");
    assert_eq!(says("say('{} and {}'.format('this', 'that'))"), "this and that");
    assert_eq!(says("say('{1}{0}'.format('b', 'a'))"), "ab");
}

#[test]
fn list_methods_and_aliasing() {
    assert_eq!(
        says("items = []\nitems.append('x')\nitems.extend(['y', 'z'])\nsay(str(len(items)))"),
        "3"
    );
    assert_eq!(says("say(str([1, 2, 1, 1].count(1)))"), "3");
    assert_eq!(says("say(str(['a', 'b'].index('b')))"), "1");
    // Lists are shared by reference.
    assert_eq!(says("a = [1]\nb = a\nb.append(2)\nsay(str(len(a)))"), "2");
    fails_with("say(str(['a'].index('q')))", InterpreterErrorKind::Value);
}

#[test]
fn builtins() {
    assert_eq!(says("say(str(sum(range(5))))"), "10");
    assert_eq!(says("def list_total(r):\n    return sum(r)\nsay(str(list_total(range(2, 9, 3))))"), "15");
    assert_eq!(says("say(str(min('pear', 'apple')))"), "apple");
    assert_eq!(says("say(str(max([3, 9, 4])))"), "9");
    assert_eq!(says("say(str(sorted([3, 1, 2])))"), "[1, 2, 3]");
    assert_eq!(
        says("pairs = enumerate(['a', 'b'], 1)\nsay(str(pairs[1]))"),
        "(2, 'b')"
    );
    assert_eq!(says("say(str(len(range(10, 0, -2))))"), "5");
    fails_with("say(str(min([])))", InterpreterErrorKind::Value);
    fails_with("say(str(range(1, 2, 0)))", InterpreterErrorKind::Value);
    fails_with("say(str(unknown_builtin(1)))", InterpreterErrorKind::Name);
}

#[test]
fn fstrings_interpolate_values() {
    assert_eq!(says("n = 3\nsay(f'{n} rooms and {n + 1} doors')"), "3 rooms and 4 doors");
    assert_eq!(says("say(f'literal {{braces}} kept')"), "literal {braces} kept");
    assert_eq!(says("v = 1.5\nsay(f'{v}')"), "1.5");
}

#[test]
fn comprehensions_do_not_leak_their_variable() {
    assert_eq!(
        says("x = 'outer'\nitems = [x * 2 for x in [1, 2, 3] if x > 1]\nsay(f'{items} {x}')"),
        "[4, 6] outer"
    );
    fails_with(
        "items = [y for y in [1]]\nsay(str(y))",
        InterpreterErrorKind::Name,
    );
}

#[test]
fn tuple_unpacking_and_swap() {
    assert_eq!(says("a, b = 1, 2\na, b = b, a\nsay(f'{a}{b}')"), "21");
    assert_eq!(
        says("total = 0\nfor i, v in enumerate([5, 7]):\n    total += i * v\nsay(str(total))"),
        "7"
    );
    fails_with("a, b = [1, 2, 3]\nsay('x')", InterpreterErrorKind::Value);
    fails_with("a, b = 5\nsay('x')", InterpreterErrorKind::Type);
}

#[test]
fn function_scoping_is_faithful() {
    // Assigned-in-function names are local even before assignment.
    fails_with(
        "count = 0\ndef bump():\n    count = count + 1\n    return count\nsay(str(bump()))",
        InterpreterErrorKind::Name,
    );
    // Reading a global without assigning works.
    assert_eq!(
        says("base = 10\ndef tenfold(x):\n    return base * x\nsay(str(tenfold(3)))"),
        "30"
    );
    // Wrong arity is a type error.
    fails_with(
        "def f(a):\n    return a\nsay(str(f()))",
        InterpreterErrorKind::Type,
    );
    // Unbounded recursion is cut off before it can exhaust the stack.
    fails_with(
        "def loop():\n    return loop()\nsay(str(loop()))",
        InterpreterErrorKind::Value,
    );
}

#[test]
fn while_loops_with_break_and_continue() {
    assert_eq!(
        says(
            "total = 0\nn = 0\nwhile True:\n    n += 1\n    if n > 10:\n        break\n    if n % 2 == 0:\n        continue\n    total += n\nsay(str(total))"
        ),
        "25"
    );
}

#[test]
fn conditional_expression_and_chained_assignment() {
    assert_eq!(says("a = b = 2\nsay(str(a + b))"), "4");
    assert_eq!(says("v = 'big' if 3 > 2 else 'small'\nsay(v)"), "big");
}

#[test]
fn subscript_assignment() {
    assert_eq!(says("xs = [1, 2, 3]\nxs[1] = 9\nxs[-1] += 1\nsay(str(xs))"), "[1, 9, 4]");
    fails_with("xs = [1]\nxs[5] = 0\nsay('x')", InterpreterErrorKind::Index);
    fails_with("t = (1, 2)\nt[0] = 9\nsay('x')", InterpreterErrorKind::Type);
}

#[test]
fn attribute_errors_name_the_type() {
    let result = simulate(
        &SourceProgram::new("say([1].flatten())", "interp-test"),
        &world(),
        10_000,
    );
    match result.outcome {
        SimulationOutcome::PythonError(e) => {
            assert_eq!(e.kind, InterpreterErrorKind::Attribute);
            assert!(e.message.contains("list"));
            assert!(e.message.contains("flatten"));
        }
        other => panic!("unexpected: {other:?}"),
    }
}

#[test]
fn string_iteration_and_membership() {
    assert_eq!(
        says("caps = ''\nfor c in 'abc':\n    caps += c.upper()\nsay(caps)"),
        "ABC"
    );
    assert_eq!(says("say(str('room' in 'conference room A'))"), "True");
    fails_with("say(str(3 in 'abc'))", InterpreterErrorKind::Type);
    fails_with("for x in 5:\n    say('x')", InterpreterErrorKind::Type);
}
