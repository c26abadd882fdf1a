//! Tree-walking interpreter. Execution is a pure function of the syntax
//! tree, the skill host's responses, and the step budget; every attempted
//! statement or expression node costs one step.

use std::collections::HashMap;
use std::collections::HashSet;
use std::rc::Rc;

use super::ast::*;
use super::value::*;
use super::{InterpreterError, InterpreterErrorKind};

const MAX_CALL_DEPTH: u32 = 100;

/// The eight skill callbacks a program can invoke. The fault type is opaque
/// to the interpreter: the first fault aborts execution and is handed back
/// unchanged.
pub trait SkillHost {
    type Fault;

    fn go_to(&mut self, location: &str) -> Result<(), Self::Fault>;
    fn get_current_location(&mut self) -> Result<String, Self::Fault>;
    fn get_all_rooms(&mut self) -> Result<Vec<String>, Self::Fault>;
    fn is_in_room(&mut self, object: &str) -> Result<bool, Self::Fault>;
    fn say(&mut self, message: &str) -> Result<(), Self::Fault>;
    fn ask(
        &mut self,
        person: &str,
        question: &str,
        options: &[String],
    ) -> Result<String, Self::Fault>;
    fn pick(&mut self, object: &str) -> Result<(), Self::Fault>;
    fn place(&mut self, object: &str) -> Result<(), Self::Fault>;
}

/// Terminal state of one execution.
#[derive(Debug)]
pub enum ExecutionOutcome<F> {
    Completed,
    Interpreter(InterpreterError),
    Skill { fault: F, span: Span },
}

/// Runs a parsed module against a skill host. Module-level statements run
/// top to bottom; if the module defines exactly one zero-argument function
/// and no skill was called at module level, that function is then invoked.
pub fn execute<H: SkillHost>(ast: &Ast, host: &mut H, budget: u64) -> ExecutionOutcome<H::Fault> {
    assert!(budget > 0, "step budget must be positive");
    let mut interp = Interp {
        host,
        globals: HashMap::new(),
        steps: 0,
        budget,
        call_depth: 0,
        module_skill_called: false,
    };
    let mut scope = Scope::Module;
    for stmt in &ast.body {
        if let Err(flow) = interp.exec_stmt(stmt, &mut scope) {
            return flow_to_outcome(flow);
        }
    }
    // Entry-point convention: auto-invoke the single zero-argument function.
    // Aliases of the same function count once.
    if !interp.module_skill_called {
        let mut seen = std::collections::HashSet::new();
        let zero_arg: Vec<Value> = interp
            .globals
            .values()
            .filter(|v| match v {
                Value::Function(f) => f.params.is_empty() && seen.insert(Rc::as_ptr(f)),
                _ => false,
            })
            .cloned()
            .collect();
        if zero_arg.len() == 1 {
            let span = ast
                .body
                .last()
                .map(|s| s.span)
                .unwrap_or_else(|| Span::new(1, 1));
            if let Err(flow) = interp.call_value(&zero_arg[0], Vec::new(), span) {
                return flow_to_outcome(flow);
            }
        }
    }
    ExecutionOutcome::Completed
}

fn flow_to_outcome<F>(flow: Flow<F>) -> ExecutionOutcome<F> {
    match flow {
        Flow::Err(e) => ExecutionOutcome::Interpreter(e),
        Flow::Skill(fault, span) => ExecutionOutcome::Skill { fault, span },
        // Parser guarantees return/break/continue stay inside functions
        // and loops.
        Flow::Return(_) | Flow::Break | Flow::Continue => unreachable!("escaped control flow"),
    }
}

enum Flow<F> {
    Err(InterpreterError),
    Skill(F, Span),
    Return(Value),
    Break,
    Continue,
}

type Exec<T, F> = Result<T, Flow<F>>;

enum Scope {
    Module,
    Function {
        locals: HashMap<String, Value>,
        local_names: Rc<HashSet<String>>,
    },
}

struct Interp<'h, H: SkillHost> {
    host: &'h mut H,
    globals: HashMap<String, Value>,
    steps: u64,
    budget: u64,
    call_depth: u32,
    module_skill_called: bool,
}

fn raise<T, F>(kind: InterpreterErrorKind, message: impl Into<String>, span: Span) -> Exec<T, F> {
    Err(Flow::Err(InterpreterError {
        kind,
        message: message.into(),
        span,
    }))
}

fn lift<T, F>(result: OpResult<T>, span: Span) -> Exec<T, F> {
    result.map_err(|e| {
        Flow::Err(InterpreterError {
            kind: e.kind,
            message: e.message,
            span,
        })
    })
}

impl<H: SkillHost> Interp<'_, H> {
    /// One step of budget; raises Timeout on the (budget+1)-th attempt.
    fn tick(&mut self, span: Span) -> Exec<(), H::Fault> {
        self.steps += 1;
        if self.steps > self.budget {
            return raise(
                InterpreterErrorKind::Timeout,
                format!("step budget of {} exhausted", self.budget),
                span,
            );
        }
        Ok(())
    }

    fn exec_block(&mut self, body: &[Stmt], scope: &mut Scope) -> Exec<(), H::Fault> {
        for stmt in body {
            self.exec_stmt(stmt, scope)?;
        }
        Ok(())
    }

    fn exec_stmt(&mut self, stmt: &Stmt, scope: &mut Scope) -> Exec<(), H::Fault> {
        self.tick(stmt.span)?;
        match &stmt.kind {
            StmtKind::Pass => Ok(()),
            StmtKind::Expr(expr) => {
                self.eval(expr, scope)?;
                Ok(())
            }
            StmtKind::Assign { targets, value } => {
                let value = self.eval(value, scope)?;
                for target in targets {
                    self.assign(target, value.clone(), scope)?;
                }
                Ok(())
            }
            StmtKind::AugAssign { target, op, value } => {
                match target {
                    Target::Name(name, span) => {
                        let current = self.load_name(name, scope, *span)?;
                        let rhs = self.eval(value, scope)?;
                        let result = lift(self.binop(*op, &current, &rhs), *span)?;
                        self.bind_name(name, result, scope);
                    }
                    Target::Subscript { base, index, span } => {
                        let base_v = self.eval(base, scope)?;
                        let index_v = self.eval(index, scope)?;
                        let current = lift(py_index(&base_v, &index_v), *span)?;
                        let rhs = self.eval(value, scope)?;
                        let result = lift(self.binop(*op, &current, &rhs), *span)?;
                        lift(py_set_index(&base_v, &index_v, result), *span)?;
                    }
                    Target::Tuple(_, span) => {
                        return raise(
                            InterpreterErrorKind::Syntax,
                            "augmented assignment target cannot be a tuple",
                            *span,
                        )
                    }
                }
                Ok(())
            }
            StmtKind::If { arms, orelse } => {
                for (test, body) in arms {
                    if self.eval(test, scope)?.truthy() {
                        return self.exec_block(body, scope);
                    }
                }
                self.exec_block(orelse, scope)
            }
            StmtKind::While { test, body } => {
                while self.eval(test, scope)?.truthy() {
                    match self.exec_block(body, scope) {
                        Ok(()) => {}
                        Err(Flow::Break) => break,
                        Err(Flow::Continue) => continue,
                        Err(other) => return Err(other),
                    }
                }
                Ok(())
            }
            StmtKind::For { target, iter, body } => {
                let iterable = self.eval(iter, scope)?;
                let mut iterator = lift(py_iter(&iterable), iter.span)?;
                while let Some(item) = iterator.next_item() {
                    self.assign(target, item, scope)?;
                    match self.exec_block(body, scope) {
                        Ok(()) => {}
                        Err(Flow::Break) => break,
                        Err(Flow::Continue) => continue,
                        Err(other) => return Err(other),
                    }
                }
                Ok(())
            }
            StmtKind::FuncDef(def) => {
                let mut locals: HashSet<String> = def.params.iter().cloned().collect();
                collect_assigned_names(&def.body, &mut locals);
                let func = Value::Function(Rc::new(FuncData {
                    name: def.name.clone(),
                    params: def.params.clone(),
                    body: def.body.clone(),
                    locals,
                }));
                self.bind_name(&def.name, func, scope);
                Ok(())
            }
            StmtKind::Return(value) => {
                let value = match value {
                    Some(expr) => self.eval(expr, scope)?,
                    None => Value::None,
                };
                Err(Flow::Return(value))
            }
            StmtKind::Break => Err(Flow::Break),
            StmtKind::Continue => Err(Flow::Continue),
        }
    }

    fn assign(&mut self, target: &Target, value: Value, scope: &mut Scope) -> Exec<(), H::Fault> {
        match target {
            Target::Name(name, _) => {
                self.bind_name(name, value, scope);
                Ok(())
            }
            Target::Tuple(targets, span) => {
                let items = match &value {
                    Value::List(items) => items.borrow().clone(),
                    Value::Tuple(items) => items.as_ref().clone(),
                    Value::Str(s) => s.chars().map(|c| Value::str(c.to_string())).collect(),
                    Value::Range(..) => lift(py_collect(&value), *span)?,
                    other => {
                        return raise(
                            InterpreterErrorKind::Type,
                            format!("cannot unpack non-iterable {} object", other.type_name()),
                            *span,
                        )
                    }
                };
                if items.len() != targets.len() {
                    return raise(
                        InterpreterErrorKind::Value,
                        format!(
                            "expected {} values to unpack, got {}",
                            targets.len(),
                            items.len()
                        ),
                        *span,
                    );
                }
                for (target, item) in targets.iter().zip(items) {
                    self.assign(target, item, scope)?;
                }
                Ok(())
            }
            Target::Subscript { base, index, span } => {
                let base_v = self.eval(base, scope)?;
                let index_v = self.eval(index, scope)?;
                lift(py_set_index(&base_v, &index_v, value), *span)
            }
        }
    }

    fn bind_name(&mut self, name: &str, value: Value, scope: &mut Scope) {
        match scope {
            Scope::Module => {
                self.globals.insert(name.to_string(), value);
            }
            Scope::Function { locals, .. } => {
                locals.insert(name.to_string(), value);
            }
        }
    }

    fn load_name(&mut self, name: &str, scope: &Scope, span: Span) -> Exec<Value, H::Fault> {
        if let Scope::Function {
            locals,
            local_names,
        } = scope
        {
            if local_names.contains(name) {
                return match locals.get(name) {
                    Some(value) => Ok(value.clone()),
                    None => raise(
                        InterpreterErrorKind::Name,
                        format!("local variable '{name}' referenced before assignment"),
                        span,
                    ),
                };
            }
        }
        if let Some(value) = self.globals.get(name) {
            return Ok(value.clone());
        }
        if let Some(builtin) = Builtin::lookup(name) {
            return Ok(Value::Builtin(builtin));
        }
        if let Some(skill) = Skill::lookup(name) {
            return Ok(Value::Skill(skill));
        }
        raise(
            InterpreterErrorKind::Name,
            format!("name '{name}' is not defined"),
            span,
        )
    }

    fn eval(&mut self, expr: &Expr, scope: &mut Scope) -> Exec<Value, H::Fault> {
        self.tick(expr.span)?;
        let span = expr.span;
        match &expr.kind {
            ExprKind::Int(v) => Ok(Value::Int(*v)),
            ExprKind::Float(v) => Ok(Value::Float(*v)),
            ExprKind::Str(v) => Ok(Value::str(v)),
            ExprKind::Bool(v) => Ok(Value::Bool(*v)),
            ExprKind::None => Ok(Value::None),
            ExprKind::Name(name) => self.load_name(name, scope, span),
            ExprKind::FString(parts) => {
                let mut out = String::new();
                for part in parts {
                    match part {
                        FStringPart::Literal(text) => out.push_str(text),
                        FStringPart::Expr(inner) => {
                            let value = self.eval(inner, scope)?;
                            out.push_str(&py_str(&value));
                        }
                    }
                }
                Ok(Value::str(out))
            }
            ExprKind::List(items) => {
                let mut values = Vec::with_capacity(items.len());
                for item in items {
                    values.push(self.eval(item, scope)?);
                }
                Ok(Value::list(values))
            }
            ExprKind::Tuple(items) => {
                let mut values = Vec::with_capacity(items.len());
                for item in items {
                    values.push(self.eval(item, scope)?);
                }
                Ok(Value::Tuple(Rc::new(values)))
            }
            ExprKind::Attribute { base, name } => {
                let base = self.eval(base, scope)?;
                self.attribute(base, name, span)
            }
            ExprKind::Subscript { base, index } => {
                let base = self.eval(base, scope)?;
                let index = self.eval(index, scope)?;
                lift(py_index(&base, &index), span)
            }
            ExprKind::Call { callee, args } => {
                let callee_v = self.eval(callee, scope)?;
                let mut arg_values = Vec::with_capacity(args.len());
                for arg in args {
                    arg_values.push(self.eval(arg, scope)?);
                }
                self.call_value(&callee_v, arg_values, span)
            }
            ExprKind::Unary { op, operand } => {
                let value = self.eval(operand, scope)?;
                match op {
                    UnaryOp::Not => Ok(Value::Bool(!value.truthy())),
                    UnaryOp::Neg => lift(py_neg(&value), span),
                    UnaryOp::Pos => lift(py_pos(&value), span),
                }
            }
            ExprKind::Binary { op, left, right } => {
                let left = self.eval(left, scope)?;
                let right = self.eval(right, scope)?;
                lift(self.binop(*op, &left, &right), span)
            }
            ExprKind::Compare { first, rest } => {
                let mut left = self.eval(first, scope)?;
                for (op, right_expr) in rest {
                    let right = self.eval(right_expr, scope)?;
                    let holds = lift(compare(*op, &left, &right), right_expr.span)?;
                    if !holds {
                        return Ok(Value::Bool(false));
                    }
                    left = right;
                }
                Ok(Value::Bool(true))
            }
            ExprKind::BoolChain { op, operands } => {
                let mut value = self.eval(&operands[0], scope)?;
                for operand in &operands[1..] {
                    let shortcut = match op {
                        BoolOp::And => !value.truthy(),
                        BoolOp::Or => value.truthy(),
                    };
                    if shortcut {
                        return Ok(value);
                    }
                    value = self.eval(operand, scope)?;
                }
                Ok(value)
            }
            ExprKind::Conditional { test, body, orelse } => {
                if self.eval(test, scope)?.truthy() {
                    self.eval(body, scope)
                } else {
                    self.eval(orelse, scope)
                }
            }
            ExprKind::ListComp {
                element,
                target,
                iter,
                filter,
            } => {
                let iterable = self.eval(iter, scope)?;
                let mut iterator = lift(py_iter(&iterable), iter.span)?;
                // The comprehension variable does not leak: shadowed names
                // are restored afterwards.
                let mut names = Vec::new();
                collect_target_names(target, &mut names);
                let saved: Vec<(String, Option<Value>)> = names
                    .iter()
                    .map(|name| (name.clone(), self.peek_name(name, scope)))
                    .collect();
                let mut out = Vec::new();
                let mut run = || -> Exec<(), H::Fault> {
                    while let Some(item) = iterator.next_item() {
                        self.assign(target, item, scope)?;
                        if let Some(filter) = filter {
                            if !self.eval(filter, scope)?.truthy() {
                                continue;
                            }
                        }
                        out.push(self.eval(element, scope)?);
                    }
                    Ok(())
                };
                let result = run();
                for (name, old) in saved {
                    match old {
                        Some(value) => self.bind_name(&name, value, scope),
                        None => self.unbind_name(&name, scope),
                    }
                }
                result?;
                Ok(Value::list(out))
            }
        }
    }

    fn peek_name(&self, name: &str, scope: &Scope) -> Option<Value> {
        match scope {
            Scope::Module => self.globals.get(name).cloned(),
            Scope::Function { locals, .. } => locals.get(name).cloned(),
        }
    }

    fn unbind_name(&mut self, name: &str, scope: &mut Scope) {
        match scope {
            Scope::Module => {
                self.globals.remove(name);
            }
            Scope::Function { locals, .. } => {
                locals.remove(name);
            }
        }
    }

    fn binop(&self, op: BinOp, left: &Value, right: &Value) -> OpResult<Value> {
        match op {
            BinOp::Add => py_add(left, right),
            BinOp::Sub => py_sub(left, right),
            BinOp::Mul => py_mul(left, right),
            BinOp::Div => py_div(left, right),
            BinOp::FloorDiv => py_floordiv(left, right),
            BinOp::Mod => py_mod(left, right),
            BinOp::Pow => py_pow(left, right),
        }
    }

    fn attribute(&mut self, base: Value, name: &str, span: Span) -> Exec<Value, H::Fault> {
        let known: &[&str] = match base {
            Value::Str(_) => &[
                "lower",
                "upper",
                "strip",
                "split",
                "join",
                "startswith",
                "endswith",
                "replace",
                "format",
            ],
            Value::List(_) => &["append", "extend", "count", "index"],
            _ => &[],
        };
        if let Some(method) = known.iter().find(|m| **m == name) {
            return Ok(Value::Method(Box::new(base), method));
        }
        raise(
            InterpreterErrorKind::Attribute,
            format!("'{}' object has no attribute '{name}'", base.type_name()),
            span,
        )
    }

    fn call_value(&mut self, callee: &Value, args: Vec<Value>, span: Span) -> Exec<Value, H::Fault> {
        match callee {
            Value::Function(func) => self.call_function(func.clone(), args, span),
            Value::Builtin(builtin) => self.call_builtin(*builtin, args, span),
            Value::Method(receiver, name) => self.call_method(receiver, name, args, span),
            Value::Skill(skill) => self.call_skill(*skill, args, span),
            other => raise(
                InterpreterErrorKind::Type,
                format!("'{}' object is not callable", other.type_name()),
                span,
            ),
        }
    }

    fn call_function(
        &mut self,
        func: Rc<FuncData>,
        args: Vec<Value>,
        span: Span,
    ) -> Exec<Value, H::Fault> {
        if args.len() != func.params.len() {
            return raise(
                InterpreterErrorKind::Type,
                format!(
                    "{}() takes {} positional argument{} but {} {} given",
                    func.name,
                    func.params.len(),
                    if func.params.len() == 1 { "" } else { "s" },
                    args.len(),
                    if args.len() == 1 { "was" } else { "were" },
                ),
                span,
            );
        }
        self.call_depth += 1;
        if self.call_depth > MAX_CALL_DEPTH {
            self.call_depth -= 1;
            return raise(
                InterpreterErrorKind::Value,
                "maximum recursion depth exceeded",
                span,
            );
        }
        let locals: HashMap<String, Value> =
            func.params.iter().cloned().zip(args).collect();
        let mut scope = Scope::Function {
            locals,
            local_names: Rc::new(func.locals.clone()),
        };
        let mut result = Value::None;
        let mut error = None;
        for stmt in &func.body {
            match self.exec_stmt(stmt, &mut scope) {
                Ok(()) => {}
                Err(Flow::Return(value)) => {
                    result = value;
                    break;
                }
                Err(other) => {
                    error = Some(other);
                    break;
                }
            }
        }
        self.call_depth -= 1;
        match error {
            Some(flow) => Err(flow),
            None => Ok(result),
        }
    }

    fn call_builtin(
        &mut self,
        builtin: Builtin,
        args: Vec<Value>,
        span: Span,
    ) -> Exec<Value, H::Fault> {
        lift(call_builtin_impl(builtin, args), span)
    }

    fn call_method(
        &mut self,
        receiver: &Value,
        name: &str,
        args: Vec<Value>,
        span: Span,
    ) -> Exec<Value, H::Fault> {
        lift(call_method_impl(receiver, name, args), span)
    }

    fn call_skill(&mut self, skill: Skill, args: Vec<Value>, span: Span) -> Exec<Value, H::Fault> {
        // Read only between module execution and auto-invocation, so this
        // means "a skill ran while the module body executed", at any call
        // depth (a module-level `task()` call counts).
        self.module_skill_called = true;
        let expect = |n: usize| -> Exec<(), H::Fault> {
            if args.len() != n {
                raise(
                    InterpreterErrorKind::Type,
                    format!(
                        "{}() takes {} argument{} but {} {} given",
                        skill.name(),
                        n,
                        if n == 1 { "" } else { "s" },
                        args.len(),
                        if args.len() == 1 { "was" } else { "were" },
                    ),
                    span,
                )
            } else {
                Ok(())
            }
        };
        let text_arg = |index: usize| -> Exec<String, H::Fault> {
            match &args[index] {
                Value::Str(s) => Ok(s.to_string()),
                other => raise(
                    InterpreterErrorKind::Type,
                    format!(
                        "{}() argument {} must be str, not {}",
                        skill.name(),
                        index + 1,
                        other.type_name()
                    ),
                    span,
                ),
            }
        };
        match skill {
            Skill::GoTo => {
                expect(1)?;
                let location = text_arg(0)?;
                self.host.go_to(&location).map_err(|f| Flow::Skill(f, span))?;
                Ok(Value::None)
            }
            Skill::GetCurrentLocation => {
                expect(0)?;
                let room = self.host.get_current_location().map_err(|f| Flow::Skill(f, span))?;
                Ok(Value::str(room))
            }
            Skill::GetAllRooms => {
                expect(0)?;
                let rooms = self.host.get_all_rooms().map_err(|f| Flow::Skill(f, span))?;
                Ok(Value::list(rooms.into_iter().map(Value::str).collect()))
            }
            Skill::IsInRoom => {
                expect(1)?;
                let object = text_arg(0)?;
                let present = self.host.is_in_room(&object).map_err(|f| Flow::Skill(f, span))?;
                Ok(Value::Bool(present))
            }
            Skill::Say => {
                expect(1)?;
                let message = text_arg(0)?;
                self.host.say(&message).map_err(|f| Flow::Skill(f, span))?;
                Ok(Value::None)
            }
            Skill::Ask => {
                expect(3)?;
                let person = text_arg(0)?;
                let question = text_arg(1)?;
                let options: Vec<String> = match &args[2] {
                    Value::List(items) => {
                        let items = items.borrow();
                        let mut out = Vec::with_capacity(items.len());
                        for item in items.iter() {
                            match item {
                                Value::Str(s) => out.push(s.to_string()),
                                other => {
                                    return raise(
                                        InterpreterErrorKind::Type,
                                        format!(
                                            "ask() options must be a list of str, found {}",
                                            other.type_name()
                                        ),
                                        span,
                                    )
                                }
                            }
                        }
                        out
                    }
                    other => {
                        return raise(
                            InterpreterErrorKind::Type,
                            format!("ask() options must be a list of str, not {}", other.type_name()),
                            span,
                        )
                    }
                };
                let answer = self
                    .host
                    .ask(&person, &question, &options)
                    .map_err(|f| Flow::Skill(f, span))?;
                Ok(Value::str(answer))
            }
            Skill::Pick => {
                expect(1)?;
                let object = text_arg(0)?;
                self.host.pick(&object).map_err(|f| Flow::Skill(f, span))?;
                Ok(Value::None)
            }
            Skill::Place => {
                expect(1)?;
                let object = text_arg(0)?;
                self.host.place(&object).map_err(|f| Flow::Skill(f, span))?;
                Ok(Value::None)
            }
        }
    }
}

fn compare(op: CmpOp, left: &Value, right: &Value) -> OpResult<bool> {
    use std::cmp::Ordering;
    Ok(match op {
        CmpOp::Eq => py_eq(left, right),
        CmpOp::Ne => !py_eq(left, right),
        CmpOp::Lt => matches!(py_cmp(left, right)?, Some(Ordering::Less)),
        CmpOp::Le => matches!(py_cmp(left, right)?, Some(Ordering::Less | Ordering::Equal)),
        CmpOp::Gt => matches!(py_cmp(left, right)?, Some(Ordering::Greater)),
        CmpOp::Ge => matches!(
            py_cmp(left, right)?,
            Some(Ordering::Greater | Ordering::Equal)
        ),
        CmpOp::In => py_contains(left, right)?,
        CmpOp::NotIn => !py_contains(left, right)?,
    })
}

fn collect_target_names(target: &Target, out: &mut Vec<String>) {
    match target {
        Target::Name(name, _) => out.push(name.clone()),
        Target::Tuple(targets, _) => {
            for t in targets {
                collect_target_names(t, out);
            }
        }
        Target::Subscript { .. } => {}
    }
}

/// Names assigned anywhere in a function body; they resolve locally even
/// before first assignment, as in the source language family.
fn collect_assigned_names(body: &[Stmt], out: &mut HashSet<String>) {
    fn add_target(target: &Target, out: &mut HashSet<String>) {
        match target {
            Target::Name(name, _) => {
                out.insert(name.clone());
            }
            Target::Tuple(targets, _) => {
                for t in targets {
                    add_target(t, out);
                }
            }
            Target::Subscript { .. } => {}
        }
    }
    for stmt in body {
        match &stmt.kind {
            StmtKind::Assign { targets, .. } => {
                for t in targets {
                    add_target(t, out);
                }
            }
            StmtKind::AugAssign { target, .. } => add_target(target, out),
            StmtKind::For { target, body, .. } => {
                add_target(target, out);
                collect_assigned_names(body, out);
            }
            StmtKind::While { body, .. } => collect_assigned_names(body, out),
            StmtKind::If { arms, orelse } => {
                for (_, body) in arms {
                    collect_assigned_names(body, out);
                }
                collect_assigned_names(orelse, out);
            }
            StmtKind::FuncDef(def) => {
                out.insert(def.name.clone());
            }
            _ => {}
        }
    }
}

// ---------------------------------------------------------------------------
// Builtins
// ---------------------------------------------------------------------------

fn op_type_error(message: impl Into<String>) -> OpError {
    OpError {
        kind: InterpreterErrorKind::Type,
        message: message.into(),
    }
}

fn op_value_error(message: impl Into<String>) -> OpError {
    OpError {
        kind: InterpreterErrorKind::Value,
        message: message.into(),
    }
}

fn arity(name: &str, args: &[Value], min: usize, max: usize) -> OpResult<()> {
    if args.len() < min || args.len() > max {
        Err(op_type_error(format!(
            "{name}() takes {min} to {max} arguments but {} were given",
            args.len()
        )))
    } else {
        Ok(())
    }
}

fn int_arg(name: &str, value: &Value) -> OpResult<i64> {
    match value {
        Value::Int(i) => Ok(*i),
        Value::Bool(b) => Ok(i64::from(*b)),
        other => Err(op_type_error(format!(
            "{name}() argument must be int, not {}",
            other.type_name()
        ))),
    }
}

fn call_builtin_impl(builtin: Builtin, args: Vec<Value>) -> OpResult<Value> {
    match builtin {
        Builtin::Len => {
            arity("len", &args, 1, 1)?;
            let len = match &args[0] {
                Value::Str(s) => s.chars().count(),
                Value::List(items) => items.borrow().len(),
                Value::Tuple(items) => items.len(),
                Value::Range(start, stop, step) => range_len(*start, *stop, *step),
                other => {
                    return Err(op_type_error(format!(
                        "object of type '{}' has no len()",
                        other.type_name()
                    )))
                }
            };
            Ok(Value::Int(len as i64))
        }
        Builtin::Range => {
            arity("range", &args, 1, 3)?;
            let ints: Vec<i64> = args
                .iter()
                .map(|a| int_arg("range", a))
                .collect::<OpResult<_>>()?;
            let (start, stop, step) = match ints.as_slice() {
                [stop] => (0, *stop, 1),
                [start, stop] => (*start, *stop, 1),
                [start, stop, step] => (*start, *stop, *step),
                _ => unreachable!(),
            };
            if step == 0 {
                return Err(op_value_error("range() arg 3 must not be zero"));
            }
            Ok(Value::Range(start, stop, step))
        }
        Builtin::Str => {
            arity("str", &args, 0, 1)?;
            Ok(match args.first() {
                None => Value::str(""),
                Some(v) => Value::str(py_str(v)),
            })
        }
        Builtin::Int => {
            arity("int", &args, 0, 1)?;
            let value = match args.first() {
                None => 0,
                Some(Value::Int(i)) => *i,
                Some(Value::Bool(b)) => i64::from(*b),
                Some(Value::Float(f)) => {
                    if f.is_nan() {
                        return Err(op_value_error("cannot convert float NaN to integer"));
                    }
                    if f.is_infinite() || f.trunc() >= 9.223_372_036_854_776e18 || f.trunc() < -9.223_372_036_854_776e18 {
                        return Err(op_value_error("cannot convert float infinity to integer"));
                    }
                    f.trunc() as i64
                }
                Some(Value::Str(s)) => {
                    let t = s.trim();
                    t.parse::<i64>().map_err(|_| {
                        op_value_error(format!("invalid literal for int() with base 10: {t:?}"))
                    })?
                }
                Some(other) => {
                    return Err(op_type_error(format!(
                        "int() argument must be a string or a number, not '{}'",
                        other.type_name()
                    )))
                }
            };
            Ok(Value::Int(value))
        }
        Builtin::Float => {
            arity("float", &args, 0, 1)?;
            let value = match args.first() {
                None => 0.0,
                Some(Value::Float(f)) => *f,
                Some(Value::Int(i)) => *i as f64,
                Some(Value::Bool(b)) => f64::from(u8::from(*b)),
                Some(Value::Str(s)) => {
                    let t = s.trim();
                    t.parse::<f64>().map_err(|_| {
                        op_value_error(format!("could not convert string to float: {t:?}"))
                    })?
                }
                Some(other) => {
                    return Err(op_type_error(format!(
                        "float() argument must be a string or a number, not '{}'",
                        other.type_name()
                    )))
                }
            };
            Ok(Value::Float(value))
        }
        Builtin::Min | Builtin::Max => {
            let name = builtin.name();
            if args.is_empty() {
                return Err(op_type_error(format!(
                    "{name} expected at least 1 argument, got 0"
                )));
            }
            let candidates = if args.len() == 1 {
                py_collect(&args[0])?
            } else {
                args
            };
            if candidates.is_empty() {
                return Err(op_value_error(format!("{name}() arg is an empty sequence")));
            }
            let mut best = candidates[0].clone();
            for candidate in &candidates[1..] {
                let replace = match py_cmp(candidate, &best)? {
                    Some(std::cmp::Ordering::Less) => builtin == Builtin::Min,
                    Some(std::cmp::Ordering::Greater) => builtin == Builtin::Max,
                    _ => false,
                };
                if replace {
                    best = candidate.clone();
                }
            }
            Ok(best)
        }
        Builtin::Sum => {
            arity("sum", &args, 1, 2)?;
            let items = py_collect(&args[0])?;
            let mut acc = args.get(1).cloned().unwrap_or(Value::Int(0));
            if matches!(acc, Value::Str(_)) {
                return Err(op_type_error("sum() can't sum strings"));
            }
            for item in items {
                acc = py_add(&acc, &item)?;
            }
            Ok(acc)
        }
        Builtin::Sorted => {
            arity("sorted", &args, 1, 1)?;
            let items = py_collect(&args[0])?;
            let sorted = merge_sort(items)?;
            Ok(Value::list(sorted))
        }
        Builtin::Enumerate => {
            arity("enumerate", &args, 1, 2)?;
            let start = match args.get(1) {
                Some(v) => int_arg("enumerate", v)?,
                None => 0,
            };
            let items = py_collect(&args[0])?;
            Ok(Value::list(
                items
                    .into_iter()
                    .enumerate()
                    .map(|(i, item)| {
                        Value::Tuple(Rc::new(vec![Value::Int(start + i as i64), item]))
                    })
                    .collect(),
            ))
        }
    }
}

/// Stable sort that surfaces comparison type errors instead of panicking.
fn merge_sort(items: Vec<Value>) -> OpResult<Vec<Value>> {
    if items.len() <= 1 {
        return Ok(items);
    }
    let mid = items.len() / 2;
    let mut right = items;
    let left = merge_sort(right.drain(..mid).collect())?;
    let right = merge_sort(right)?;
    let mut out = Vec::with_capacity(left.len() + right.len());
    let mut li = 0;
    let mut ri = 0;
    while li < left.len() && ri < right.len() {
        // Stability: take from the left unless right is strictly smaller.
        let right_smaller = matches!(
            py_cmp(&right[ri], &left[li])?,
            Some(std::cmp::Ordering::Less)
        );
        if right_smaller {
            out.push(right[ri].clone());
            ri += 1;
        } else {
            out.push(left[li].clone());
            li += 1;
        }
    }
    out.extend_from_slice(&left[li..]);
    out.extend_from_slice(&right[ri..]);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Methods
// ---------------------------------------------------------------------------

fn str_arg(method: &str, value: &Value) -> OpResult<String> {
    match value {
        Value::Str(s) => Ok(s.to_string()),
        other => Err(op_type_error(format!(
            "{method}() argument must be str, not {}",
            other.type_name()
        ))),
    }
}

fn call_method_impl(receiver: &Value, name: &str, args: Vec<Value>) -> OpResult<Value> {
    match (receiver, name) {
        (Value::Str(s), "lower") => {
            arity("lower", &args, 0, 0)?;
            Ok(Value::str(s.to_lowercase()))
        }
        (Value::Str(s), "upper") => {
            arity("upper", &args, 0, 0)?;
            Ok(Value::str(s.to_uppercase()))
        }
        (Value::Str(s), "strip") => {
            arity("strip", &args, 0, 1)?;
            match args.first() {
                None => Ok(Value::str(s.trim())),
                Some(chars) => {
                    let chars: Vec<char> = str_arg("strip", chars)?.chars().collect();
                    Ok(Value::str(s.trim_matches(|c: char| chars.contains(&c))))
                }
            }
        }
        (Value::Str(s), "split") => {
            arity("split", &args, 0, 1)?;
            let parts: Vec<Value> = match args.first() {
                None => s.split_whitespace().map(Value::str).collect(),
                Some(sep) => {
                    let sep = str_arg("split", sep)?;
                    if sep.is_empty() {
                        return Err(op_value_error("empty separator"));
                    }
                    s.split(sep.as_str()).map(Value::str).collect()
                }
            };
            Ok(Value::list(parts))
        }
        (Value::Str(s), "join") => {
            arity("join", &args, 1, 1)?;
            let items = py_collect(&args[0])?;
            let mut parts = Vec::with_capacity(items.len());
            for item in &items {
                match item {
                    Value::Str(part) => parts.push(part.to_string()),
                    other => {
                        return Err(op_type_error(format!(
                            "sequence item: expected str instance, {} found",
                            other.type_name()
                        )))
                    }
                }
            }
            Ok(Value::str(parts.join(s)))
        }
        (Value::Str(s), "startswith") => {
            arity("startswith", &args, 1, 1)?;
            let prefix = str_arg("startswith", &args[0])?;
            Ok(Value::Bool(s.starts_with(&prefix)))
        }
        (Value::Str(s), "endswith") => {
            arity("endswith", &args, 1, 1)?;
            let suffix = str_arg("endswith", &args[0])?;
            Ok(Value::Bool(s.ends_with(&suffix)))
        }
        (Value::Str(s), "replace") => {
            arity("replace", &args, 2, 2)?;
            let old = str_arg("replace", &args[0])?;
            let new = str_arg("replace", &args[1])?;
            Ok(Value::str(s.replace(&old, &new)))
        }
        (Value::Str(s), "format") => format_method(s, &args),
        (Value::List(items), "append") => {
            arity("append", &args, 1, 1)?;
            items.borrow_mut().push(args.into_iter().next().unwrap());
            Ok(Value::None)
        }
        (Value::List(items), "extend") => {
            arity("extend", &args, 1, 1)?;
            let extra = py_collect(&args[0])?;
            items.borrow_mut().extend(extra);
            Ok(Value::None)
        }
        (Value::List(items), "count") => {
            arity("count", &args, 1, 1)?;
            let needle = &args[0];
            let count = items.borrow().iter().filter(|v| py_eq(v, needle)).count();
            Ok(Value::Int(count as i64))
        }
        (Value::List(items), "index") => {
            arity("index", &args, 1, 1)?;
            let needle = &args[0];
            let position = items.borrow().iter().position(|v| py_eq(v, needle));
            match position {
                Some(i) => Ok(Value::Int(i as i64)),
                None => Err(op_value_error(format!(
                    "{} is not in list",
                    py_repr(needle, 0)
                ))),
            }
        }
        _ => Err(op_type_error(format!(
            "method {name}() not supported on {}",
            receiver.type_name()
        ))),
    }
}

/// `str.format` with automatic `{}` and explicit positional `{0}` fields.
fn format_method(template: &str, args: &[Value]) -> OpResult<Value> {
    let chars: Vec<char> = template.chars().collect();
    let mut out = String::new();
    let mut auto = 0usize;
    let mut used_auto = false;
    let mut used_manual = false;
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '{' if chars.get(i + 1) == Some(&'{') => {
                out.push('{');
                i += 2;
            }
            '}' if chars.get(i + 1) == Some(&'}') => {
                out.push('}');
                i += 2;
            }
            '}' => return Err(op_value_error("single '}' in format string")),
            '{' => {
                let close = chars[i + 1..]
                    .iter()
                    .position(|c| *c == '}')
                    .ok_or_else(|| op_value_error("single '{' in format string"))?;
                let field: String = chars[i + 1..i + 1 + close].iter().collect();
                if field.contains(':') || field.contains('!') {
                    return Err(op_value_error("format spec not supported"));
                }
                let index = if field.is_empty() {
                    if used_manual {
                        return Err(op_value_error(
                            "cannot switch from manual field numbering to automatic",
                        ));
                    }
                    used_auto = true;
                    let index = auto;
                    auto += 1;
                    index
                } else if let Ok(index) = field.parse::<usize>() {
                    if used_auto {
                        return Err(op_value_error(
                            "cannot switch from automatic field numbering to manual",
                        ));
                    }
                    used_manual = true;
                    index
                } else {
                    return Err(OpError {
                        kind: InterpreterErrorKind::Key,
                        message: format!("format field {field:?}"),
                    });
                };
                let value = args.get(index).ok_or_else(|| OpError {
                    kind: InterpreterErrorKind::Index,
                    message: format!("replacement index {index} out of range"),
                })?;
                out.push_str(&py_str(value));
                i += close + 2;
            }
            c => {
                out.push(c);
                i += 1;
            }
        }
    }
    Ok(Value::str(out))
}
