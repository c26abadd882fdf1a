//! Brute-force oracles and deterministic random generators backing the
//! differential test suites. Everything here is a direct transcription of
//! a definition, kept independent of the optimized paths it checks.
//! Compiled for tests and behind the `testkit` feature only.

use crate::rtl::{AtomPredicate, LtlFormula, SkillSelector};
use crate::seed::SeedStream;
use crate::sim::{SkillKind, Trace, TraceElement, TraceValue};
use crate::world::{Pattern, RobotState, WorldState};

// ---------------------------------------------------------------------------
// Finite-trace temporal logic: quantifier-expansion evaluator
// ---------------------------------------------------------------------------

/// Expands F/G/U directly as quantifiers over positions; exponential, only
/// fit for short traces and shallow formulas.
pub fn eval_ltl_naive(formula: &LtlFormula, trace: &Trace, i: usize) -> bool {
    let len = trace.elements.len();
    match formula {
        LtlFormula::Atom(atom) => i < len && atom.holds(&trace.elements[i], i, len),
        LtlFormula::Not(f) => !eval_ltl_naive(f, trace, i),
        LtlFormula::And(a, b) => eval_ltl_naive(a, trace, i) && eval_ltl_naive(b, trace, i),
        LtlFormula::Or(a, b) => eval_ltl_naive(a, trace, i) || eval_ltl_naive(b, trace, i),
        LtlFormula::Next(f) => i + 1 < len && eval_ltl_naive(f, trace, i + 1),
        LtlFormula::Eventually(f) => (i..len).any(|j| eval_ltl_naive(f, trace, j)),
        LtlFormula::Always(f) => (i..len).all(|j| eval_ltl_naive(f, trace, j)),
        LtlFormula::Until(a, b) => (i..len).any(|j| {
            eval_ltl_naive(b, trace, j) && (i..j).all(|k| eval_ltl_naive(a, trace, k))
        }),
    }
}

const ORACLE_SKILLS: [SkillKind; 3] = [SkillKind::GoTo, SkillKind::Say, SkillKind::Pick];
const ORACLE_ARGS: [&str; 2] = ["a", "b"];
const ORACLE_ROOMS: [&str; 2] = ["x", "y"];

/// Random trace over a 3-skill alphabet, length ≤ 8.
pub fn random_trace(stream: &mut SeedStream) -> Trace {
    let world = WorldState {
        rooms: ORACLE_ROOMS.iter().map(|r| r.to_string()).collect(),
        object_locations: Default::default(),
        pickable: Default::default(),
        persons: Vec::new(),
        robot_start: ORACLE_ROOMS[0].to_string(),
    };
    let len = stream.next_index(9);
    let elements = (0..len)
        .map(|index| TraceElement {
            index,
            skill: ORACLE_SKILLS[stream.next_index(ORACLE_SKILLS.len())],
            args: vec![TraceValue::Str(
                ORACLE_ARGS[stream.next_index(ORACLE_ARGS.len())].to_string(),
            )],
            result: TraceValue::Null,
            location: ORACLE_ROOMS[stream.next_index(ORACLE_ROOMS.len())].to_string(),
        })
        .collect();
    let terminal_robot = RobotState::at_start_of(&world);
    Trace {
        world,
        elements,
        terminal_robot,
    }
}

fn random_atom(stream: &mut SeedStream) -> AtomPredicate {
    let mut atom = AtomPredicate::any();
    match stream.next_index(6) {
        0 => atom.first = true,
        1 => atom.last = true,
        2 => {
            atom.location =
                Some(Pattern::new(ORACLE_ROOMS[stream.next_index(2)]).expect("literal compiles"));
        }
        _ => {
            atom.skill = SkillSelector::Skill(ORACLE_SKILLS[stream.next_index(3)]);
            if stream.next_bool() {
                let pattern = match stream.next_index(3) {
                    0 => "a",
                    1 => "b",
                    _ => "a|b",
                };
                atom.args
                    .push((0, Pattern::new(pattern).expect("literal compiles")));
            }
            if stream.next_bool() {
                atom.location = Some(
                    Pattern::new(ORACLE_ROOMS[stream.next_index(2)]).expect("literal compiles"),
                );
            }
        }
    }
    atom
}

/// Boolean combination of atoms whose truth at a fixed index never changes
/// when the trace is extended (no `last` selector, no temporal operators).
/// This is the fragment the F-monotone / G-antitone properties quantify
/// over.
pub fn random_state_formula(stream: &mut SeedStream, depth: u32) -> LtlFormula {
    let atom = |stream: &mut SeedStream| {
        let mut atom = random_atom(stream);
        atom.last = false;
        LtlFormula::Atom(atom)
    };
    if depth == 0 {
        return atom(stream);
    }
    match stream.next_index(4) {
        0 => atom(stream),
        1 => LtlFormula::not(random_state_formula(stream, depth - 1)),
        2 => LtlFormula::and(
            random_state_formula(stream, depth - 1),
            random_state_formula(stream, depth - 1),
        ),
        _ => LtlFormula::or(
            random_state_formula(stream, depth - 1),
            random_state_formula(stream, depth - 1),
        ),
    }
}

/// Random formula of the given maximum depth over the oracle alphabet.
pub fn random_formula(stream: &mut SeedStream, depth: u32) -> LtlFormula {
    if depth == 0 {
        return LtlFormula::Atom(random_atom(stream));
    }
    match stream.next_index(8) {
        0 => LtlFormula::Atom(random_atom(stream)),
        1 => LtlFormula::not(random_formula(stream, depth - 1)),
        2 => LtlFormula::and(
            random_formula(stream, depth - 1),
            random_formula(stream, depth - 1),
        ),
        3 => LtlFormula::or(
            random_formula(stream, depth - 1),
            random_formula(stream, depth - 1),
        ),
        4 => LtlFormula::next(random_formula(stream, depth - 1)),
        5 => LtlFormula::eventually(random_formula(stream, depth - 1)),
        6 => LtlFormula::always(random_formula(stream, depth - 1)),
        _ => LtlFormula::until(
            random_formula(stream, depth - 1),
            random_formula(stream, depth - 1),
        ),
    }
}

// ---------------------------------------------------------------------------
// pass@k: subset-enumeration oracle
// ---------------------------------------------------------------------------

/// Probability that a uniformly random size-k subset of n samples (of which
/// the first c pass) contains at least one passing sample. Enumerates every
/// subset; n must stay small.
pub fn pass_at_k_enumerated(n: usize, c: usize, k: usize) -> f64 {
    assert!(n <= 20, "enumeration oracle is exponential in n");
    assert!(c <= n && k >= 1 && k <= n);
    let passing_mask: u32 = if c == 0 { 0 } else { (1 << c) - 1 };
    let mut total = 0u64;
    let mut hit = 0u64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        total += 1;
        if mask & passing_mask != 0 {
            hit += 1;
        }
    }
    hit as f64 / total as f64
}

// ---------------------------------------------------------------------------
// Expression semantics: independent reference evaluator
// ---------------------------------------------------------------------------

/// Error classes the reference evaluator predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefError {
    Type,
    Value,
    ZeroDivision,
    Index,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RefValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<RefValue>),
}

#[derive(Debug, Clone)]
pub enum RefExpr {
    Lit(RefValue),
    Unary(&'static str, Box<RefExpr>),
    Bin(&'static str, Box<RefExpr>, Box<RefExpr>),
    Cmp(&'static str, Box<RefExpr>, Box<RefExpr>),
    BoolOp(&'static str, Box<RefExpr>, Box<RefExpr>),
    Cond(Box<RefExpr>, Box<RefExpr>, Box<RefExpr>),
    Index(Box<RefExpr>, Box<RefExpr>),
    Call1(&'static str, Box<RefExpr>),
    Call2(&'static str, Box<RefExpr>, Box<RefExpr>),
}

/// Renders a reference expression as fully parenthesized program text.
pub fn render_expr(expr: &RefExpr) -> String {
    match expr {
        RefExpr::Lit(value) => render_value_literal(value),
        RefExpr::Unary(op, inner) => format!("({op} {})", render_expr(inner)),
        RefExpr::Bin(op, a, b) => format!("({} {op} {})", render_expr(a), render_expr(b)),
        RefExpr::Cmp(op, a, b) => format!("({} {op} {})", render_expr(a), render_expr(b)),
        RefExpr::BoolOp(op, a, b) => format!("({} {op} {})", render_expr(a), render_expr(b)),
        RefExpr::Cond(test, body, orelse) => format!(
            "({} if {} else {})",
            render_expr(body),
            render_expr(test),
            render_expr(orelse)
        ),
        RefExpr::Index(base, index) => format!("({}[{}])", render_expr(base), render_expr(index)),
        RefExpr::Call1(name, a) => format!("{name}({})", render_expr(a)),
        RefExpr::Call2(name, a, b) => format!("{name}({}, {})", render_expr(a), render_expr(b)),
    }
}

fn render_value_literal(value: &RefValue) -> String {
    match value {
        RefValue::Bool(true) => "True".to_string(),
        RefValue::Bool(false) => "False".to_string(),
        RefValue::Int(i) => {
            if *i < 0 {
                format!("({i})")
            } else {
                i.to_string()
            }
        }
        RefValue::Float(f) => {
            if *f < 0.0 {
                format!("({})", ref_float_repr(*f))
            } else {
                ref_float_repr(*f)
            }
        }
        RefValue::Str(s) => ref_str_quote(s),
        RefValue::List(items) => {
            let inner: Vec<String> = items.iter().map(render_value_literal).collect();
            format!("[{}]", inner.join(", "))
        }
    }
}

/// Shortest round-trip float text with the family's conventions; written
/// separately from the engine's renderer on purpose.
pub fn ref_float_repr(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x == f64::INFINITY {
        return "inf".to_string();
    }
    if x == f64::NEG_INFINITY {
        return "-inf".to_string();
    }
    let magnitude = x.abs();
    let needs_exponent = x != 0.0 && !(1e-4..1e16).contains(&magnitude);
    if needs_exponent {
        let text = format!("{x:e}");
        let at = text.find('e').expect("exponent marker");
        let mantissa = &text[..at];
        let exponent: i32 = text[at + 1..].parse().expect("exponent value");
        if exponent < 0 {
            format!("{mantissa}e-{:02}", -exponent)
        } else {
            format!("{mantissa}e+{exponent:02}")
        }
    } else {
        let text = format!("{x}");
        if text.contains('.') {
            text
        } else {
            text + ".0"
        }
    }
}

fn ref_str_quote(s: &str) -> String {
    let use_double = s.contains('\'') && !s.contains('"');
    let quote = if use_double { '"' } else { '\'' };
    let mut out = String::new();
    out.push(quote);
    for c in s.chars() {
        if c == '\\' {
            out.push_str("\\\\");
        } else if c == '\n' {
            out.push_str("\\n");
        } else if c == '\t' {
            out.push_str("\\t");
        } else if c == '\r' {
            out.push_str("\\r");
        } else if c == quote {
            out.push('\\');
            out.push(c);
        } else {
            out.push(c);
        }
    }
    out.push(quote);
    out
}

/// repr() of a reference value.
pub fn ref_repr(value: &RefValue) -> String {
    match value {
        RefValue::Bool(true) => "True".to_string(),
        RefValue::Bool(false) => "False".to_string(),
        RefValue::Int(i) => i.to_string(),
        RefValue::Float(f) => ref_float_repr(*f),
        RefValue::Str(s) => ref_str_quote(s),
        RefValue::List(items) => {
            let inner: Vec<String> = items.iter().map(ref_repr).collect();
            format!("[{}]", inner.join(", "))
        }
    }
}

type RefResult = Result<RefValue, RefError>;

fn as_num(value: &RefValue) -> Option<f64> {
    match value {
        RefValue::Bool(b) => Some(f64::from(u8::from(*b))),
        RefValue::Int(i) => Some(*i as f64),
        RefValue::Float(f) => Some(*f),
        _ => None,
    }
}

fn as_int(value: &RefValue) -> Option<i64> {
    match value {
        RefValue::Bool(b) => Some(i64::from(*b)),
        RefValue::Int(i) => Some(*i),
        _ => None,
    }
}

fn truthy(value: &RefValue) -> bool {
    match value {
        RefValue::Bool(b) => *b,
        RefValue::Int(i) => *i != 0,
        RefValue::Float(f) => *f != 0.0,
        RefValue::Str(s) => !s.is_empty(),
        RefValue::List(items) => !items.is_empty(),
    }
}

fn ref_eq(a: &RefValue, b: &RefValue) -> bool {
    match (a, b) {
        (RefValue::Str(x), RefValue::Str(y)) => x == y,
        (RefValue::List(x), RefValue::List(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| ref_eq(p, q))
        }
        (RefValue::Str(_), _) | (_, RefValue::Str(_)) => false,
        (RefValue::List(_), _) | (_, RefValue::List(_)) => false,
        _ => {
            // Numeric comparison; ints are exact, so route int/int separately.
            if let (Some(x), Some(y)) = (as_int(a), as_int(b)) {
                return x == y;
            }
            let (x, y) = (as_num(a).unwrap(), as_num(b).unwrap());
            if let (Some(i), RefValue::Float(f)) = (as_int(a), b) {
                return float_eq_int(*f, i);
            }
            if let (RefValue::Float(f), Some(i)) = (a, as_int(b)) {
                return float_eq_int(*f, i);
            }
            x == y
        }
    }
}

fn float_eq_int(f: f64, i: i64) -> bool {
    f.is_finite() && f.fract() == 0.0 && f.abs() < 9.3e18 && (f as i64) == i
}

/// Less-than; `Err` for incomparable types, `Ok(None)` for NaN.
fn ref_lt(a: &RefValue, b: &RefValue) -> Result<Option<bool>, RefError> {
    match (a, b) {
        (RefValue::Str(x), RefValue::Str(y)) => Ok(Some(x < y)),
        (RefValue::List(x), RefValue::List(y)) => {
            for (p, q) in x.iter().zip(y.iter()) {
                if !ref_eq(p, q) {
                    return ref_lt(p, q);
                }
            }
            Ok(Some(x.len() < y.len()))
        }
        _ => match (as_num(a), as_num(b)) {
            (Some(x), Some(y)) => {
                if x.is_nan() || y.is_nan() {
                    Ok(None)
                } else if let (Some(p), Some(q)) = (as_int(a), as_int(b)) {
                    Ok(Some(p < q))
                } else {
                    Ok(Some(x < y))
                }
            }
            _ => Err(RefError::Type),
        },
    }
}

/// Direct recursive evaluation of a reference expression.
pub fn eval_ref(expr: &RefExpr) -> RefResult {
    match expr {
        RefExpr::Lit(value) => Ok(value.clone()),
        RefExpr::Unary(op, inner) => {
            let value = eval_ref(inner)?;
            match *op {
                "not" => Ok(RefValue::Bool(!truthy(&value))),
                "-" => match value {
                    RefValue::Bool(b) => Ok(RefValue::Int(-i64::from(b))),
                    RefValue::Int(i) => i.checked_neg().map(RefValue::Int).ok_or(RefError::Value),
                    RefValue::Float(f) => Ok(RefValue::Float(-f)),
                    _ => Err(RefError::Type),
                },
                "+" => match value {
                    RefValue::Bool(b) => Ok(RefValue::Int(i64::from(b))),
                    RefValue::Int(_) | RefValue::Float(_) => Ok(value),
                    _ => Err(RefError::Type),
                },
                _ => unreachable!(),
            }
        }
        RefExpr::Bin(op, a, b) => {
            let a = eval_ref(a)?;
            let b = eval_ref(b)?;
            ref_binop(op, a, b)
        }
        RefExpr::Cmp(op, a, b) => {
            let a = eval_ref(a)?;
            let b = eval_ref(b)?;
            let result = match *op {
                "==" => ref_eq(&a, &b),
                "!=" => !ref_eq(&a, &b),
                "<" => ref_lt(&a, &b)?.unwrap_or(false),
                ">" => ref_lt(&b, &a)?.unwrap_or(false),
                "<=" => {
                    let lt = ref_lt(&a, &b)?;
                    match lt {
                        None => false,
                        Some(true) => true,
                        Some(false) => ref_eq(&a, &b),
                    }
                }
                ">=" => {
                    let gt = ref_lt(&b, &a)?;
                    match gt {
                        None => false,
                        Some(true) => true,
                        Some(false) => ref_eq(&a, &b),
                    }
                }
                "in" => ref_contains(&a, &b)?,
                _ => unreachable!(),
            };
            Ok(RefValue::Bool(result))
        }
        RefExpr::BoolOp(op, a, b) => {
            let left = eval_ref(a)?;
            match *op {
                "and" => {
                    if truthy(&left) {
                        eval_ref(b)
                    } else {
                        Ok(left)
                    }
                }
                "or" => {
                    if truthy(&left) {
                        Ok(left)
                    } else {
                        eval_ref(b)
                    }
                }
                _ => unreachable!(),
            }
        }
        RefExpr::Cond(test, body, orelse) => {
            if truthy(&eval_ref(test)?) {
                eval_ref(body)
            } else {
                eval_ref(orelse)
            }
        }
        RefExpr::Index(base, index) => {
            let base = eval_ref(base)?;
            let index = eval_ref(index)?;
            let i = as_int(&index).ok_or(RefError::Type)?;
            match base {
                RefValue::List(items) => {
                    let len = items.len() as i64;
                    let at = if i < 0 { i + len } else { i };
                    if at < 0 || at >= len {
                        Err(RefError::Index)
                    } else {
                        Ok(items[at as usize].clone())
                    }
                }
                RefValue::Str(s) => {
                    let chars: Vec<char> = s.chars().collect();
                    let len = chars.len() as i64;
                    let at = if i < 0 { i + len } else { i };
                    if at < 0 || at >= len {
                        Err(RefError::Index)
                    } else {
                        Ok(RefValue::Str(chars[at as usize].to_string()))
                    }
                }
                _ => Err(RefError::Type),
            }
        }
        RefExpr::Call1(name, a) => {
            let value = eval_ref(a)?;
            match *name {
                "len" => match value {
                    RefValue::Str(s) => Ok(RefValue::Int(s.chars().count() as i64)),
                    RefValue::List(items) => Ok(RefValue::Int(items.len() as i64)),
                    _ => Err(RefError::Type),
                },
                "str" => Ok(RefValue::Str(match &value {
                    RefValue::Str(s) => s.clone(),
                    other => ref_repr(other),
                })),
                "int" => match value {
                    RefValue::Bool(b) => Ok(RefValue::Int(i64::from(b))),
                    RefValue::Int(i) => Ok(RefValue::Int(i)),
                    RefValue::Float(f) => {
                        if f.is_nan() || f.is_infinite() || f.trunc().abs() >= 9.3e18 {
                            Err(RefError::Value)
                        } else {
                            Ok(RefValue::Int(f.trunc() as i64))
                        }
                    }
                    RefValue::Str(s) => {
                        s.trim().parse::<i64>().map(RefValue::Int).map_err(|_| RefError::Value)
                    }
                    RefValue::List(_) => Err(RefError::Type),
                },
                "float" => match value {
                    RefValue::Bool(b) => Ok(RefValue::Float(f64::from(u8::from(b)))),
                    RefValue::Int(i) => Ok(RefValue::Float(i as f64)),
                    RefValue::Float(f) => Ok(RefValue::Float(f)),
                    RefValue::Str(s) => s
                        .trim()
                        .parse::<f64>()
                        .map(RefValue::Float)
                        .map_err(|_| RefError::Value),
                    RefValue::List(_) => Err(RefError::Type),
                },
                _ => unreachable!(),
            }
        }
        RefExpr::Call2(name, a, b) => {
            let a = eval_ref(a)?;
            let b = eval_ref(b)?;
            match *name {
                "min" | "max" => {
                    let want_less = *name == "min";
                    let b_wins = match ref_lt(&b, &a)? {
                        Some(true) => want_less,
                        Some(false) | None => {
                            if matches!(ref_lt(&a, &b)?, Some(true)) {
                                !want_less
                            } else {
                                false
                            }
                        }
                    };
                    Ok(if b_wins { b } else { a })
                }
                _ => unreachable!(),
            }
        }
    }
}

fn ref_contains(needle: &RefValue, haystack: &RefValue) -> Result<bool, RefError> {
    match haystack {
        RefValue::List(items) => Ok(items.iter().any(|item| ref_eq(item, needle))),
        RefValue::Str(s) => match needle {
            RefValue::Str(sub) => Ok(s.contains(sub.as_str())),
            _ => Err(RefError::Type),
        },
        _ => Err(RefError::Type),
    }
}

fn ref_binop(op: &str, a: RefValue, b: RefValue) -> RefResult {
    use RefValue::*;
    match op {
        "+" => match (&a, &b) {
            (Str(x), Str(y)) => Ok(Str(format!("{x}{y}"))),
            (List(x), List(y)) => {
                let mut out = x.clone();
                out.extend(y.iter().cloned());
                Ok(List(out))
            }
            _ => num_binop(op, &a, &b),
        },
        "*" => match (&a, &b) {
            (Str(s), other) | (other, Str(s)) => {
                let n = as_int(other).ok_or(RefError::Type)?;
                let n = n.max(0) as usize;
                if s.len() * n > (1 << 24) {
                    return Err(RefError::Value);
                }
                Ok(Str(s.repeat(n)))
            }
            (List(items), other) | (other, List(items)) => {
                let n = as_int(other).ok_or(RefError::Type)?;
                let n = n.max(0) as usize;
                if items.len() * n > (1 << 24) {
                    return Err(RefError::Value);
                }
                let mut out = Vec::new();
                for _ in 0..n {
                    out.extend(items.iter().cloned());
                }
                Ok(List(out))
            }
            _ => num_binop(op, &a, &b),
        },
        _ => num_binop(op, &a, &b),
    }
}

fn num_binop(op: &str, a: &RefValue, b: &RefValue) -> RefResult {
    use RefValue::*;
    let both_int = as_int(a).is_some() && as_int(b).is_some();
    let (x, y) = match (as_num(a), as_num(b)) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(RefError::Type),
    };
    if both_int {
        let (p, q) = (as_int(a).unwrap(), as_int(b).unwrap());
        return match op {
            "+" => p.checked_add(q).map(Int).ok_or(RefError::Value),
            "-" => p.checked_sub(q).map(Int).ok_or(RefError::Value),
            "*" => p.checked_mul(q).map(Int).ok_or(RefError::Value),
            "/" => {
                if q == 0 {
                    Err(RefError::ZeroDivision)
                } else {
                    Ok(Float(p as f64 / q as f64))
                }
            }
            "//" => {
                if q == 0 {
                    Err(RefError::ZeroDivision)
                } else if p == i64::MIN && q == -1 {
                    Err(RefError::Value)
                } else {
                    let mut quot = p / q;
                    if p % q != 0 && ((p < 0) ^ (q < 0)) {
                        quot -= 1;
                    }
                    Ok(Int(quot))
                }
            }
            "%" => {
                if q == 0 {
                    Err(RefError::ZeroDivision)
                } else if p == i64::MIN && q == -1 {
                    Ok(Int(0))
                } else {
                    let mut rem = p % q;
                    if rem != 0 && ((rem < 0) ^ (q < 0)) {
                        rem += q;
                    }
                    Ok(Int(rem))
                }
            }
            "**" => {
                if q >= 0 {
                    let exp = u32::try_from(q).map_err(|_| RefError::Value)?;
                    p.checked_pow(exp).map(Int).ok_or(RefError::Value)
                } else if p == 0 {
                    Err(RefError::ZeroDivision)
                } else {
                    Ok(Float((p as f64).powi(q as i32)))
                }
            }
            _ => unreachable!(),
        };
    }
    match op {
        "+" => Ok(Float(x + y)),
        "-" => Ok(Float(x - y)),
        "*" => Ok(Float(x * y)),
        "/" => {
            if y == 0.0 {
                Err(RefError::ZeroDivision)
            } else {
                Ok(Float(x / y))
            }
        }
        "//" => {
            if y == 0.0 {
                Err(RefError::ZeroDivision)
            } else {
                Ok(Float((x / y).floor()))
            }
        }
        "%" => {
            if y == 0.0 {
                Err(RefError::ZeroDivision)
            } else {
                let mut r = x % y;
                if r == 0.0 {
                    r = if y < 0.0 { -0.0 } else { 0.0 };
                } else if (r < 0.0) ^ (y < 0.0) {
                    r += y;
                }
                Ok(Float(r))
            }
        }
        "**" => {
            if x == 0.0 && y < 0.0 {
                Err(RefError::ZeroDivision)
            } else if x < 0.0 && y.fract() != 0.0 {
                Err(RefError::Value)
            } else {
                Ok(Float(x.powf(y)))
            }
        }
        _ => unreachable!(),
    }
}

/// Random expression generator over the reference grammar.
pub fn random_expr(stream: &mut SeedStream, depth: u32) -> RefExpr {
    if depth == 0 {
        return RefExpr::Lit(random_leaf(stream, 1));
    }
    let child = |stream: &mut SeedStream| Box::new(random_expr(stream, depth - 1));
    match stream.next_index(16) {
        0 | 1 => RefExpr::Lit(random_leaf(stream, 2)),
        2 => RefExpr::Unary(
            ["-", "+", "not"][stream.next_index(3)],
            child(stream),
        ),
        3..=7 => RefExpr::Bin(
            ["+", "-", "*", "/", "//", "%", "**"][stream.next_index(7)],
            child(stream),
            child(stream),
        ),
        8..=10 => RefExpr::Cmp(
            ["==", "!=", "<", "<=", ">", ">=", "in"][stream.next_index(7)],
            child(stream),
            child(stream),
        ),
        11 => RefExpr::BoolOp(["and", "or"][stream.next_index(2)], child(stream), child(stream)),
        12 => RefExpr::Cond(child(stream), child(stream), child(stream)),
        13 => RefExpr::Index(child(stream), child(stream)),
        14 => RefExpr::Call1(
            ["len", "str", "int", "float"][stream.next_index(4)],
            child(stream),
        ),
        _ => RefExpr::Call2(["min", "max"][stream.next_index(2)], child(stream), child(stream)),
    }
}

fn random_leaf(stream: &mut SeedStream, list_depth: u32) -> RefValue {
    match stream.next_index(if list_depth > 0 { 5 } else { 4 }) {
        0 => RefValue::Int(stream.next_index(19) as i64 - 9),
        1 => RefValue::Float([0.0, 0.5, -1.25, 2.0, 0.1, 3.75][stream.next_index(6)]),
        2 => RefValue::Bool(stream.next_bool()),
        3 => RefValue::Str(
            ["", "a", "ab", "ba", "hi there"][stream.next_index(5)].to_string(),
        ),
        _ => {
            let len = stream.next_index(3);
            RefValue::List(
                (0..len)
                    .map(|_| random_leaf(stream, list_depth - 1))
                    .collect(),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_oracle_handles_the_spec_cases() {
        let mut stream = SeedStream::new(1);
        let trace = loop {
            let t = random_trace(&mut stream);
            if t.elements.len() >= 2 {
                break t;
            }
        };
        // F any-atom must hold at 0 for non-empty traces.
        let f = LtlFormula::eventually(LtlFormula::Atom(AtomPredicate::any()));
        assert!(eval_ltl_naive(&f, &trace, 0));
        assert!(!eval_ltl_naive(&f, &trace, trace.elements.len()));
    }

    #[test]
    fn enumerated_pass_at_k_spot_checks() {
        assert_eq!(pass_at_k_enumerated(5, 5, 1), 1.0);
        assert_eq!(pass_at_k_enumerated(5, 0, 3), 0.0);
        // C(5,3)=10 subsets; with c=2 exactly C(3,3)=1 subset misses.
        let got = pass_at_k_enumerated(5, 2, 3);
        assert!((got - 0.9).abs() < 1e-12);
    }

    #[test]
    fn reference_evaluator_spot_checks() {
        use RefExpr::*;
        use RefValue::*;
        // -7 // 2 == -4
        let e = Bin(
            "//",
            Box::new(Lit(Int(-7))),
            Box::new(Lit(Int(2))),
        );
        assert_eq!(eval_ref(&e), Ok(Int(-4)));
        // "a" + 1 is a type error
        let e = Bin("+", Box::new(Lit(Str("a".into()))), Box::new(Lit(Int(1))));
        assert_eq!(eval_ref(&e), Err(RefError::Type));
        // True + True == 2
        let e = Bin("+", Box::new(Lit(Bool(true))), Box::new(Lit(Bool(true))));
        assert_eq!(eval_ref(&e), Ok(Int(2)));
        // 1 / 0 raises
        let e = Bin("/", Box::new(Lit(Int(1))), Box::new(Lit(Int(0))));
        assert_eq!(eval_ref(&e), Err(RefError::ZeroDivision));
    }

    #[test]
    fn ref_float_repr_conventions() {
        assert_eq!(ref_float_repr(1.0), "1.0");
        assert_eq!(ref_float_repr(1e16), "1e+16");
        assert_eq!(ref_float_repr(1.5e-5), "1.5e-05");
    }
}
