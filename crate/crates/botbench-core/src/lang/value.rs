//! Runtime values and operator semantics. The rules here track the source
//! language family: bools are integers in arithmetic, `/` is float division,
//! floor division and modulo round toward negative infinity, ordering across
//! unrelated types is a type error while equality is just `False`.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashSet;
use std::rc::Rc;

use super::ast::Stmt;
use super::InterpreterErrorKind;

/// Engine limit on sequence materialization (repeat results, range lists).
/// Resource abuse beyond the step budget is out of scope; this only keeps a
/// single `'x' * 10**9` from exhausting memory before the budget can.
const MAX_SEQ_LEN: usize = 1 << 24;

#[derive(Debug, Clone)]
pub enum Value {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(Rc<str>),
    List(Rc<RefCell<Vec<Value>>>),
    Tuple(Rc<Vec<Value>>),
    Range(i64, i64, i64),
    Function(Rc<FuncData>),
    Builtin(Builtin),
    Method(Box<Value>, &'static str),
    Skill(Skill),
}

#[derive(Debug)]
pub struct FuncData {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    /// Names assigned anywhere in the body; these live in the local frame.
    pub locals: HashSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Len,
    Range,
    Str,
    Int,
    Float,
    Min,
    Max,
    Sum,
    Sorted,
    Enumerate,
}

impl Builtin {
    pub fn lookup(name: &str) -> Option<Builtin> {
        Some(match name {
            "len" => Builtin::Len,
            "range" => Builtin::Range,
            "str" => Builtin::Str,
            "int" => Builtin::Int,
            "float" => Builtin::Float,
            "min" => Builtin::Min,
            "max" => Builtin::Max,
            "sum" => Builtin::Sum,
            "sorted" => Builtin::Sorted,
            "enumerate" => Builtin::Enumerate,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Len => "len",
            Builtin::Range => "range",
            Builtin::Str => "str",
            Builtin::Int => "int",
            Builtin::Float => "float",
            Builtin::Min => "min",
            Builtin::Max => "max",
            Builtin::Sum => "sum",
            Builtin::Sorted => "sorted",
            Builtin::Enumerate => "enumerate",
        }
    }
}

/// The eight robot skills callable from programs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Skill {
    GoTo,
    GetCurrentLocation,
    GetAllRooms,
    IsInRoom,
    Say,
    Ask,
    Pick,
    Place,
}

impl Skill {
    pub fn lookup(name: &str) -> Option<Skill> {
        Some(match name {
            "go_to" => Skill::GoTo,
            "get_current_location" => Skill::GetCurrentLocation,
            "get_all_rooms" => Skill::GetAllRooms,
            "is_in_room" => Skill::IsInRoom,
            "say" => Skill::Say,
            "ask" => Skill::Ask,
            "pick" => Skill::Pick,
            "place" => Skill::Place,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Skill::GoTo => "go_to",
            Skill::GetCurrentLocation => "get_current_location",
            Skill::GetAllRooms => "get_all_rooms",
            Skill::IsInRoom => "is_in_room",
            Skill::Say => "say",
            Skill::Ask => "ask",
            Skill::Pick => "pick",
            Skill::Place => "place",
        }
    }
}

/// Operator-level failure; the interpreter attaches the span.
#[derive(Debug, Clone)]
pub struct OpError {
    pub kind: InterpreterErrorKind,
    pub message: String,
}

pub type OpResult<T> = Result<T, OpError>;

fn type_error(message: impl Into<String>) -> OpError {
    OpError {
        kind: InterpreterErrorKind::Type,
        message: message.into(),
    }
}

fn value_error(message: impl Into<String>) -> OpError {
    OpError {
        kind: InterpreterErrorKind::Value,
        message: message.into(),
    }
}

fn zero_division(message: &str) -> OpError {
    OpError {
        kind: InterpreterErrorKind::ZeroDivision,
        message: message.to_string(),
    }
}

fn overflow() -> OpError {
    value_error("integer overflow")
}

impl Value {
    pub fn str(s: impl AsRef<str>) -> Value {
        Value::Str(Rc::from(s.as_ref()))
    }

    pub fn list(items: Vec<Value>) -> Value {
        Value::List(Rc::new(RefCell::new(items)))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::None => "NoneType",
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Str(_) => "str",
            Value::List(_) => "list",
            Value::Tuple(_) => "tuple",
            Value::Range(..) => "range",
            Value::Function(_) => "function",
            Value::Builtin(_) => "builtin_function_or_method",
            Value::Method(..) => "builtin_function_or_method",
            Value::Skill(_) => "builtin_function_or_method",
        }
    }

    pub fn truthy(&self) -> bool {
        match self {
            Value::None => false,
            Value::Bool(b) => *b,
            Value::Int(i) => *i != 0,
            Value::Float(f) => *f != 0.0,
            Value::Str(s) => !s.is_empty(),
            Value::List(items) => !items.borrow().is_empty(),
            Value::Tuple(items) => !items.is_empty(),
            Value::Range(start, stop, step) => range_len(*start, *stop, *step) > 0,
            _ => true,
        }
    }

    /// Numeric view with bool-as-int coercion. `None` when not a number.
    fn as_number(&self) -> Option<Num> {
        match self {
            Value::Bool(b) => Some(Num::Int(i64::from(*b))),
            Value::Int(i) => Some(Num::Int(*i)),
            Value::Float(f) => Some(Num::Float(*f)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Num {
    Int(i64),
    Float(f64),
}

pub fn range_len(start: i64, stop: i64, step: i64) -> usize {
    if step > 0 {
        if start >= stop {
            0
        } else {
            ((stop - start - 1) / step + 1) as usize
        }
    } else if start <= stop {
        0
    } else {
        ((start - stop - 1) / (-step) + 1) as usize
    }
}

// ---------------------------------------------------------------------------
// Equality and ordering
// ---------------------------------------------------------------------------

/// Exact int/float equality: no precision loss for large integers.
fn int_eq_float(i: i64, f: f64) -> bool {
    if !f.is_finite() || f.fract() != 0.0 {
        return false;
    }
    if !(-9.223_372_036_854_776e18..9.223_372_036_854_776e18).contains(&f) {
        return false;
    }
    f as i64 == i
}

fn int_cmp_float(i: i64, f: f64) -> Option<Ordering> {
    if f.is_nan() {
        return None;
    }
    if f == f64::INFINITY || f >= 9.223_372_036_854_776e18 {
        return Some(Ordering::Less);
    }
    if f == f64::NEG_INFINITY || f < -9.223_372_036_854_776e18 {
        return Some(Ordering::Greater);
    }
    let trunc = f.trunc() as i64;
    match i.cmp(&trunc) {
        Ordering::Equal => {
            let fract = f.fract();
            if fract > 0.0 {
                Some(Ordering::Less)
            } else if fract < 0.0 {
                Some(Ordering::Greater)
            } else {
                Some(Ordering::Equal)
            }
        }
        other => Some(other),
    }
}

pub fn py_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::None, Value::None) => true,
        (Value::Str(x), Value::Str(y)) => x == y,
        (Value::List(x), Value::List(y)) => {
            if Rc::ptr_eq(x, y) {
                return true;
            }
            let x = x.borrow();
            let y = y.borrow();
            x.len() == y.len() && x.iter().zip(y.iter()).all(|(a, b)| py_eq(a, b))
        }
        (Value::Tuple(x), Value::Tuple(y)) => {
            x.len() == y.len() && x.iter().zip(y.iter()).all(|(a, b)| py_eq(a, b))
        }
        (Value::Range(s1, e1, t1), Value::Range(s2, e2, t2)) => {
            let (l1, l2) = (range_len(*s1, *e1, *t1), range_len(*s2, *e2, *t2));
            l1 == l2 && (l1 == 0 || (s1 == s2 && (l1 == 1 || t1 == t2)))
        }
        _ => match (a.as_number(), b.as_number()) {
            (Some(Num::Int(x)), Some(Num::Int(y))) => x == y,
            (Some(Num::Float(x)), Some(Num::Float(y))) => x == y,
            (Some(Num::Int(x)), Some(Num::Float(y))) => int_eq_float(x, y),
            (Some(Num::Float(x)), Some(Num::Int(y))) => int_eq_float(y, x),
            _ => false,
        },
    }
}

/// Ordering for `<`/`<=`/`>`/`>=`. `Ok(None)` means the operands are
/// comparable but unordered (NaN); all four operators are then false.
pub fn py_cmp(a: &Value, b: &Value) -> OpResult<Option<Ordering>> {
    if let (Some(x), Some(y)) = (a.as_number(), b.as_number()) {
        return Ok(match (x, y) {
            (Num::Int(x), Num::Int(y)) => Some(x.cmp(&y)),
            (Num::Float(x), Num::Float(y)) => x.partial_cmp(&y),
            (Num::Int(x), Num::Float(y)) => int_cmp_float(x, y),
            (Num::Float(x), Num::Int(y)) => int_cmp_float(y, x).map(Ordering::reverse),
        });
    }
    match (a, b) {
        (Value::Str(x), Value::Str(y)) => Ok(Some(x.cmp(y))),
        (Value::List(x), Value::List(y)) => {
            let x = x.borrow().clone();
            let y = y.borrow().clone();
            seq_cmp(&x, &y)
        }
        (Value::Tuple(x), Value::Tuple(y)) => seq_cmp(x, y),
        _ => Err(type_error(format!(
            "'<' not supported between instances of '{}' and '{}'",
            a.type_name(),
            b.type_name()
        ))),
    }
}

fn seq_cmp(x: &[Value], y: &[Value]) -> OpResult<Option<Ordering>> {
    for (a, b) in x.iter().zip(y.iter()) {
        if !py_eq(a, b) {
            return py_cmp(a, b);
        }
    }
    Ok(Some(x.len().cmp(&y.len())))
}

// ---------------------------------------------------------------------------
// Arithmetic
// ---------------------------------------------------------------------------

fn num_pair(a: Num, b: Num) -> (f64, f64) {
    let to_f = |n: Num| match n {
        Num::Int(i) => i as f64,
        Num::Float(f) => f,
    };
    (to_f(a), to_f(b))
}

pub fn py_add(a: &Value, b: &Value) -> OpResult<Value> {
    if let (Some(x), Some(y)) = (a.as_number(), b.as_number()) {
        return match (x, y) {
            (Num::Int(x), Num::Int(y)) => x.checked_add(y).map(Value::Int).ok_or_else(overflow),
            _ => {
                let (x, y) = num_pair(x, y);
                Ok(Value::Float(x + y))
            }
        };
    }
    match (a, b) {
        (Value::Str(x), Value::Str(y)) => {
            let mut s = x.to_string();
            s.push_str(y);
            Ok(Value::str(s))
        }
        (Value::Str(_), other) => Err(type_error(format!(
            "can only concatenate str (not \"{}\") to str",
            other.type_name()
        ))),
        (Value::List(x), Value::List(y)) => {
            let mut items = x.borrow().clone();
            items.extend(y.borrow().iter().cloned());
            Ok(Value::list(items))
        }
        (Value::Tuple(x), Value::Tuple(y)) => {
            let mut items = x.as_ref().clone();
            items.extend(y.iter().cloned());
            Ok(Value::Tuple(Rc::new(items)))
        }
        _ => Err(type_error(format!(
            "unsupported operand type(s) for +: '{}' and '{}'",
            a.type_name(),
            b.type_name()
        ))),
    }
}

pub fn py_sub(a: &Value, b: &Value) -> OpResult<Value> {
    match (a.as_number(), b.as_number()) {
        (Some(Num::Int(x)), Some(Num::Int(y))) => {
            x.checked_sub(y).map(Value::Int).ok_or_else(overflow)
        }
        (Some(x), Some(y)) => {
            let (x, y) = num_pair(x, y);
            Ok(Value::Float(x - y))
        }
        _ => Err(type_error(format!(
            "unsupported operand type(s) for -: '{}' and '{}'",
            a.type_name(),
            b.type_name()
        ))),
    }
}

fn repeat_count(n: i64) -> OpResult<usize> {
    if n <= 0 {
        return Ok(0);
    }
    let n = n as usize;
    if n > MAX_SEQ_LEN {
        return Err(value_error("repeat result too large"));
    }
    Ok(n)
}

pub fn py_mul(a: &Value, b: &Value) -> OpResult<Value> {
    if let (Some(x), Some(y)) = (a.as_number(), b.as_number()) {
        return match (x, y) {
            (Num::Int(x), Num::Int(y)) => x.checked_mul(y).map(Value::Int).ok_or_else(overflow),
            _ => {
                let (x, y) = num_pair(x, y);
                Ok(Value::Float(x * y))
            }
        };
    }
    let repeat = |seq: &Value, count: &Value| -> Option<OpResult<Value>> {
        let n = match count.as_number() {
            Some(Num::Int(n)) => n,
            _ => return None,
        };
        Some(match seq {
            Value::Str(s) => {
                let n = match repeat_count(n) {
                    Ok(n) => n,
                    Err(e) => return Some(Err(e)),
                };
                if s.len().saturating_mul(n) > MAX_SEQ_LEN {
                    Err(value_error("repeat result too large"))
                } else {
                    Ok(Value::str(s.repeat(n)))
                }
            }
            Value::List(items) => {
                let n = match repeat_count(n) {
                    Ok(n) => n,
                    Err(e) => return Some(Err(e)),
                };
                let items = items.borrow();
                if items.len().saturating_mul(n) > MAX_SEQ_LEN {
                    Err(value_error("repeat result too large"))
                } else {
                    let mut out = Vec::with_capacity(items.len() * n);
                    for _ in 0..n {
                        out.extend(items.iter().cloned());
                    }
                    Ok(Value::list(out))
                }
            }
            Value::Tuple(items) => {
                let n = match repeat_count(n) {
                    Ok(n) => n,
                    Err(e) => return Some(Err(e)),
                };
                if items.len().saturating_mul(n) > MAX_SEQ_LEN {
                    Err(value_error("repeat result too large"))
                } else {
                    let mut out = Vec::with_capacity(items.len() * n);
                    for _ in 0..n {
                        out.extend(items.iter().cloned());
                    }
                    Ok(Value::Tuple(Rc::new(out)))
                }
            }
            _ => return None,
        })
    };
    if let Some(result) = repeat(a, b) {
        return result;
    }
    if let Some(result) = repeat(b, a) {
        return result;
    }
    Err(type_error(format!(
        "unsupported operand type(s) for *: '{}' and '{}'",
        a.type_name(),
        b.type_name()
    )))
}

pub fn py_div(a: &Value, b: &Value) -> OpResult<Value> {
    match (a.as_number(), b.as_number()) {
        (Some(x), Some(y)) => {
            let (x, y) = num_pair(x, y);
            if y == 0.0 {
                Err(zero_division("division by zero"))
            } else {
                Ok(Value::Float(x / y))
            }
        }
        _ => Err(type_error(format!(
            "unsupported operand type(s) for /: '{}' and '{}'",
            a.type_name(),
            b.type_name()
        ))),
    }
}

/// Floor division on i64 (rounds toward negative infinity).
fn int_floor_div(a: i64, b: i64) -> OpResult<i64> {
    if b == 0 {
        return Err(zero_division("integer division or modulo by zero"));
    }
    if a == i64::MIN && b == -1 {
        return Err(overflow());
    }
    let q = a / b;
    if a % b != 0 && ((a < 0) != (b < 0)) {
        Ok(q - 1)
    } else {
        Ok(q)
    }
}

/// Modulo with the sign of the divisor.
fn int_mod(a: i64, b: i64) -> OpResult<i64> {
    if b == 0 {
        return Err(zero_division("integer division or modulo by zero"));
    }
    if a == i64::MIN && b == -1 {
        return Ok(0);
    }
    let r = a % b;
    if r != 0 && ((r < 0) != (b < 0)) {
        Ok(r + b)
    } else {
        Ok(r)
    }
}

pub fn py_floordiv(a: &Value, b: &Value) -> OpResult<Value> {
    match (a.as_number(), b.as_number()) {
        (Some(Num::Int(x)), Some(Num::Int(y))) => int_floor_div(x, y).map(Value::Int),
        (Some(x), Some(y)) => {
            let (x, y) = num_pair(x, y);
            if y == 0.0 {
                Err(zero_division("float floor division by zero"))
            } else {
                Ok(Value::Float((x / y).floor()))
            }
        }
        _ => Err(type_error(format!(
            "unsupported operand type(s) for //: '{}' and '{}'",
            a.type_name(),
            b.type_name()
        ))),
    }
}

pub fn py_mod(a: &Value, b: &Value) -> OpResult<Value> {
    match (a.as_number(), b.as_number()) {
        (Some(Num::Int(x)), Some(Num::Int(y))) => int_mod(x, y).map(Value::Int),
        (Some(x), Some(y)) => {
            let (x, y) = num_pair(x, y);
            if y == 0.0 {
                return Err(zero_division("float modulo"));
            }
            let mut r = x % y;
            if r != 0.0 {
                if (r < 0.0) != (y < 0.0) {
                    r += y;
                }
            } else {
                // A zero result takes the divisor's sign.
                r = 0.0f64.copysign(y);
            }
            Ok(Value::Float(r))
        }
        _ => Err(type_error(format!(
            "unsupported operand type(s) for %: '{}' and '{}'",
            a.type_name(),
            b.type_name()
        ))),
    }
}

pub fn py_pow(a: &Value, b: &Value) -> OpResult<Value> {
    match (a.as_number(), b.as_number()) {
        (Some(Num::Int(x)), Some(Num::Int(y))) => {
            if y >= 0 {
                let exp = u32::try_from(y).map_err(|_| overflow())?;
                x.checked_pow(exp).map(Value::Int).ok_or_else(overflow)
            } else if x == 0 {
                Err(zero_division("0 cannot be raised to a negative power"))
            } else {
                Ok(Value::Float((x as f64).powi(y as i32)))
            }
        }
        (Some(x), Some(y)) => {
            let (x, y) = num_pair(x, y);
            if x == 0.0 && y < 0.0 {
                return Err(zero_division("0.0 cannot be raised to a negative power"));
            }
            if x < 0.0 && y.fract() != 0.0 {
                return Err(value_error("negative number cannot be raised to a fractional power"));
            }
            Ok(Value::Float(x.powf(y)))
        }
        _ => Err(type_error(format!(
            "unsupported operand type(s) for **: '{}' and '{}'",
            a.type_name(),
            b.type_name()
        ))),
    }
}

pub fn py_neg(a: &Value) -> OpResult<Value> {
    match a.as_number() {
        Some(Num::Int(x)) => x.checked_neg().map(Value::Int).ok_or_else(overflow),
        Some(Num::Float(x)) => Ok(Value::Float(-x)),
        None => Err(type_error(format!(
            "bad operand type for unary -: '{}'",
            a.type_name()
        ))),
    }
}

pub fn py_pos(a: &Value) -> OpResult<Value> {
    match a.as_number() {
        Some(Num::Int(x)) => Ok(Value::Int(x)),
        Some(Num::Float(x)) => Ok(Value::Float(x)),
        None => Err(type_error(format!(
            "bad operand type for unary +: '{}'",
            a.type_name()
        ))),
    }
}

// ---------------------------------------------------------------------------
// Membership, indexing, iteration
// ---------------------------------------------------------------------------

pub fn py_contains(needle: &Value, haystack: &Value) -> OpResult<bool> {
    match haystack {
        Value::Str(s) => match needle {
            Value::Str(sub) => Ok(s.contains(sub.as_ref())),
            other => Err(type_error(format!(
                "'in <string>' requires string as left operand, not {}",
                other.type_name()
            ))),
        },
        Value::List(items) => Ok(items.borrow().iter().any(|item| py_eq(item, needle))),
        Value::Tuple(items) => Ok(items.iter().any(|item| py_eq(item, needle))),
        Value::Range(start, stop, step) => {
            let candidate = match needle.as_number() {
                Some(Num::Int(i)) => i,
                _ => return Ok(false),
            };
            let len = range_len(*start, *stop, *step) as i64;
            if len == 0 {
                return Ok(false);
            }
            let offset = candidate - *start;
            Ok(offset % *step == 0 && offset / *step >= 0 && offset / *step < len)
        }
        other => Err(type_error(format!(
            "argument of type '{}' is not iterable",
            other.type_name()
        ))),
    }
}

fn normalize_index(index: i64, len: usize) -> Option<usize> {
    let len = len as i64;
    let idx = if index < 0 { index + len } else { index };
    if idx < 0 || idx >= len {
        None
    } else {
        Some(idx as usize)
    }
}

pub fn py_index(base: &Value, index: &Value) -> OpResult<Value> {
    let idx = match index.as_number() {
        Some(Num::Int(i)) => i,
        _ => {
            return Err(type_error(format!(
                "{} indices must be integers, not {}",
                base.type_name(),
                index.type_name()
            )))
        }
    };
    match base {
        Value::List(items) => {
            let items = items.borrow();
            normalize_index(idx, items.len())
                .map(|i| items[i].clone())
                .ok_or_else(|| OpError {
                    kind: InterpreterErrorKind::Index,
                    message: "list index out of range".to_string(),
                })
        }
        Value::Tuple(items) => normalize_index(idx, items.len())
            .map(|i| items[i].clone())
            .ok_or_else(|| OpError {
                kind: InterpreterErrorKind::Index,
                message: "tuple index out of range".to_string(),
            }),
        Value::Str(s) => {
            let chars: Vec<char> = s.chars().collect();
            normalize_index(idx, chars.len())
                .map(|i| Value::str(chars[i].to_string()))
                .ok_or_else(|| OpError {
                    kind: InterpreterErrorKind::Index,
                    message: "string index out of range".to_string(),
                })
        }
        Value::Range(start, stop, step) => {
            let len = range_len(*start, *stop, *step);
            normalize_index(idx, len)
                .map(|i| Value::Int(start + (i as i64) * step))
                .ok_or_else(|| OpError {
                    kind: InterpreterErrorKind::Index,
                    message: "range object index out of range".to_string(),
                })
        }
        other => Err(type_error(format!(
            "'{}' object is not subscriptable",
            other.type_name()
        ))),
    }
}

pub fn py_set_index(base: &Value, index: &Value, value: Value) -> OpResult<()> {
    match base {
        Value::List(items) => {
            let idx = match index.as_number() {
                Some(Num::Int(i)) => i,
                _ => {
                    return Err(type_error(format!(
                        "list indices must be integers, not {}",
                        index.type_name()
                    )))
                }
            };
            let mut items = items.borrow_mut();
            let len = items.len();
            match normalize_index(idx, len) {
                Some(i) => {
                    items[i] = value;
                    Ok(())
                }
                None => Err(OpError {
                    kind: InterpreterErrorKind::Index,
                    message: "list assignment index out of range".to_string(),
                }),
            }
        }
        other => Err(type_error(format!(
            "'{}' object does not support item assignment",
            other.type_name()
        ))),
    }
}

/// Index-based iterator over a live sequence, matching the family's
/// behavior when a list is mutated during iteration.
pub struct ValueIter {
    value: Value,
    index: usize,
}

impl ValueIter {
    pub fn next_item(&mut self) -> Option<Value> {
        let i = self.index;
        let item = match &self.value {
            Value::List(items) => items.borrow().get(i).cloned(),
            Value::Tuple(items) => items.get(i).cloned(),
            Value::Str(s) => s.chars().nth(i).map(|c| Value::str(c.to_string())),
            Value::Range(start, stop, step) => {
                if i < range_len(*start, *stop, *step) {
                    Some(Value::Int(start + (i as i64) * step))
                } else {
                    None
                }
            }
            _ => None,
        };
        if item.is_some() {
            self.index += 1;
        }
        item
    }
}

pub fn py_iter(value: &Value) -> OpResult<ValueIter> {
    match value {
        Value::List(_) | Value::Tuple(_) | Value::Str(_) | Value::Range(..) => Ok(ValueIter {
            value: value.clone(),
            index: 0,
        }),
        other => Err(type_error(format!(
            "'{}' object is not iterable",
            other.type_name()
        ))),
    }
}

/// Materializes an iterable; used by builtins like sorted and sum.
pub fn py_collect(value: &Value) -> OpResult<Vec<Value>> {
    let mut iter = py_iter(value)?;
    let mut out = Vec::new();
    while let Some(item) = iter.next_item() {
        out.push(item);
        if out.len() > MAX_SEQ_LEN {
            return Err(value_error("sequence too large"));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Float rendering that matches the family's repr: shortest round-trip
/// digits, `.0` on integral values, exponent form outside [1e-4, 1e16).
pub fn py_float_repr(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let abs = x.abs();
    if x != 0.0 && !(1e-4..1e16).contains(&abs) {
        let sci = format!("{x:e}");
        let (mantissa, exp) = sci.split_once('e').expect("exponent form");
        let exp: i32 = exp.parse().expect("exponent digits");
        let sign = if exp < 0 { "-" } else { "+" };
        return format!("{}e{}{:02}", mantissa, sign, exp.abs());
    }
    let plain = format!("{x}");
    if plain.contains('.') {
        plain
    } else {
        format!("{plain}.0")
    }
}

pub fn py_str(value: &Value) -> String {
    match value {
        Value::Str(s) => s.to_string(),
        _ => py_repr(value, 0),
    }
}

pub fn py_repr(value: &Value, depth: u32) -> String {
    if depth > 32 {
        // Cyclic or absurdly deep structure; truncate rather than recurse.
        return "...".to_string();
    }
    match value {
        Value::None => "None".to_string(),
        Value::Bool(true) => "True".to_string(),
        Value::Bool(false) => "False".to_string(),
        Value::Int(i) => i.to_string(),
        Value::Float(f) => py_float_repr(*f),
        Value::Str(s) => repr_str(s),
        Value::List(items) => {
            let items = items.borrow();
            let inner: Vec<String> = items.iter().map(|v| py_repr(v, depth + 1)).collect();
            format!("[{}]", inner.join(", "))
        }
        Value::Tuple(items) => {
            let inner: Vec<String> = items.iter().map(|v| py_repr(v, depth + 1)).collect();
            if items.len() == 1 {
                format!("({},)", inner[0])
            } else {
                format!("({})", inner.join(", "))
            }
        }
        Value::Range(start, stop, step) => {
            if *step == 1 {
                format!("range({start}, {stop})")
            } else {
                format!("range({start}, {stop}, {step})")
            }
        }
        Value::Function(f) => format!("<function {}>", f.name),
        Value::Builtin(b) => format!("<built-in function {}>", b.name()),
        Value::Method(_, name) => format!("<built-in method {name}>"),
        Value::Skill(s) => format!("<built-in function {}>", s.name()),
    }
}

fn repr_str(s: &str) -> String {
    let quote = if s.contains('\'') && !s.contains('"') {
        '"'
    } else {
        '\''
    };
    let mut out = String::with_capacity(s.len() + 2);
    out.push(quote);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c == quote => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
    out.push(quote);
    out
}
