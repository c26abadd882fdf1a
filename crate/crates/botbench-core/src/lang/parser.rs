//! Recursive-descent parser for the program subset. Out-of-subset
//! constructs are reported as `Unsupported` with the construct name;
//! everything else that fails to parse is a `Syntax` error with a span.

use super::ast::*;
use super::token::{Kw, Lexer, Op, Tok, Token};
use super::{InterpreterError, InterpreterErrorKind};

const MAX_NESTING: u32 = 200;

pub fn parse_module(source: &str) -> Result<Ast, InterpreterError> {
    let tokens = Lexer::new(source).tokenize()?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        depth: 0,
        fn_depth: 0,
        loop_depth: 0,
    };
    let body = parser.module()?;
    Ok(Ast { body })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: u32,
    fn_depth: u32,
    loop_depth: u32,
}

type PResult<T> = Result<T, InterpreterError>;

fn syntax(message: impl Into<String>, span: Span) -> InterpreterError {
    InterpreterError {
        kind: InterpreterErrorKind::Syntax,
        message: message.into(),
        span,
    }
}

fn unsupported(construct: &str, span: Span) -> InterpreterError {
    InterpreterError {
        kind: InterpreterErrorKind::Unsupported,
        message: construct.to_string(),
        span,
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let token = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        token
    }

    fn eat_op(&mut self, op: Op) -> bool {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: Kw) -> bool {
        if *self.peek() == Tok::Keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: Op, what: &str) -> PResult<Span> {
        let span = self.peek_span();
        if self.eat_op(op) {
            Ok(span)
        } else {
            Err(syntax(format!("expected {what}"), span))
        }
    }

    fn enter(&mut self, span: Span) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(syntax("nesting too deep", span));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn module(&mut self) -> PResult<Vec<Stmt>> {
        let mut body = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Newline => {
                    self.bump();
                }
                _ => body.extend(self.statement()?),
            }
        }
        Ok(body)
    }

    /// One logical statement line or compound statement. Simple statements
    /// may be chained with `;`, hence the Vec.
    fn statement(&mut self) -> PResult<Vec<Stmt>> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::Reserved(word) => Err(unsupported(word, span)),
            Tok::Keyword(Kw::If) => Ok(vec![self.if_stmt()?]),
            Tok::Keyword(Kw::While) => Ok(vec![self.while_stmt()?]),
            Tok::Keyword(Kw::For) => Ok(vec![self.for_stmt()?]),
            Tok::Keyword(Kw::Def) => Ok(vec![self.def_stmt()?]),
            Tok::Keyword(Kw::Elif) | Tok::Keyword(Kw::Else) => {
                Err(syntax("unexpected block keyword", span))
            }
            Tok::Indent => Err(syntax("unexpected indent", span)),
            _ => self.simple_stmt_line(),
        }
    }

    fn simple_stmt_line(&mut self) -> PResult<Vec<Stmt>> {
        let mut stmts = vec![self.small_stmt()?];
        while self.eat_op(Op::Semicolon) {
            if matches!(self.peek(), Tok::Newline | Tok::Eof) {
                break;
            }
            stmts.push(self.small_stmt()?);
        }
        match self.peek() {
            Tok::Newline => {
                self.bump();
            }
            Tok::Eof | Tok::Dedent => {}
            Tok::Reserved(word) => return Err(unsupported(word, self.peek_span())),
            _ => return Err(syntax("unexpected token after statement", self.peek_span())),
        }
        Ok(stmts)
    }

    fn small_stmt(&mut self) -> PResult<Stmt> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::Reserved(word) => Err(unsupported(word, span)),
            Tok::Keyword(Kw::Pass) => {
                self.bump();
                Ok(Stmt {
                    kind: StmtKind::Pass,
                    span,
                })
            }
            Tok::Keyword(Kw::Break) => {
                self.bump();
                if self.loop_depth == 0 {
                    return Err(syntax("'break' outside loop", span));
                }
                Ok(Stmt {
                    kind: StmtKind::Break,
                    span,
                })
            }
            Tok::Keyword(Kw::Continue) => {
                self.bump();
                if self.loop_depth == 0 {
                    return Err(syntax("'continue' outside loop", span));
                }
                Ok(Stmt {
                    kind: StmtKind::Continue,
                    span,
                })
            }
            Tok::Keyword(Kw::Return) => {
                self.bump();
                if self.fn_depth == 0 {
                    return Err(syntax("'return' outside function", span));
                }
                let value = if matches!(
                    self.peek(),
                    Tok::Newline | Tok::Eof | Tok::Dedent | Tok::Op(Op::Semicolon)
                ) {
                    None
                } else {
                    Some(self.testlist()?)
                };
                Ok(Stmt {
                    kind: StmtKind::Return(value),
                    span,
                })
            }
            _ => self.expr_stmt(),
        }
    }

    /// Expression statement, assignment chain, or augmented assignment.
    fn expr_stmt(&mut self) -> PResult<Stmt> {
        let span = self.peek_span();
        let first = self.testlist()?;
        let aug = match self.peek() {
            Tok::Op(Op::PlusAssign) => Some(BinOp::Add),
            Tok::Op(Op::MinusAssign) => Some(BinOp::Sub),
            Tok::Op(Op::StarAssign) => Some(BinOp::Mul),
            Tok::Op(Op::SlashAssign) => Some(BinOp::Div),
            Tok::Op(Op::DoubleSlashAssign) => Some(BinOp::FloorDiv),
            Tok::Op(Op::PercentAssign) => Some(BinOp::Mod),
            Tok::Op(Op::DoubleStarAssign) => Some(BinOp::Pow),
            _ => None,
        };
        if let Some(op) = aug {
            self.bump();
            let target = expr_to_target(first)?;
            if matches!(target, Target::Tuple(..)) {
                return Err(syntax("augmented assignment target cannot be a tuple", span));
            }
            let value = self.testlist()?;
            return Ok(Stmt {
                kind: StmtKind::AugAssign { target, op, value },
                span,
            });
        }
        if *self.peek() == Tok::Op(Op::Assign) {
            let mut parts = vec![first];
            while self.eat_op(Op::Assign) {
                parts.push(self.testlist()?);
            }
            let value = parts.pop().unwrap();
            let targets = parts
                .into_iter()
                .map(expr_to_target)
                .collect::<PResult<Vec<_>>>()?;
            return Ok(Stmt {
                kind: StmtKind::Assign { targets, value },
                span,
            });
        }
        Ok(Stmt {
            kind: StmtKind::Expr(first),
            span,
        })
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let span = self.peek_span();
        self.bump(); // if
        let mut arms = Vec::new();
        let test = self.test()?;
        self.expect_op(Op::Colon, "':' after condition")?;
        arms.push((test, self.suite()?));
        let mut orelse = Vec::new();
        loop {
            if self.eat_kw(Kw::Elif) {
                let test = self.test()?;
                self.expect_op(Op::Colon, "':' after condition")?;
                arms.push((test, self.suite()?));
            } else if self.eat_kw(Kw::Else) {
                self.expect_op(Op::Colon, "':' after else")?;
                orelse = self.suite()?;
                break;
            } else {
                break;
            }
        }
        Ok(Stmt {
            kind: StmtKind::If { arms, orelse },
            span,
        })
    }

    fn while_stmt(&mut self) -> PResult<Stmt> {
        let span = self.peek_span();
        self.bump(); // while
        let test = self.test()?;
        self.expect_op(Op::Colon, "':' after condition")?;
        self.loop_depth += 1;
        let body = self.suite()?;
        self.loop_depth -= 1;
        if *self.peek() == Tok::Keyword(Kw::Else) {
            return Err(unsupported("loop else clause", self.peek_span()));
        }
        Ok(Stmt {
            kind: StmtKind::While { test, body },
            span,
        })
    }

    fn for_stmt(&mut self) -> PResult<Stmt> {
        let span = self.peek_span();
        self.bump(); // for
        let target = self.target_list()?;
        if !self.eat_kw(Kw::In) {
            return Err(syntax("expected 'in' in for statement", self.peek_span()));
        }
        let iter = self.testlist()?;
        self.expect_op(Op::Colon, "':' after for clause")?;
        self.loop_depth += 1;
        let body = self.suite()?;
        self.loop_depth -= 1;
        if *self.peek() == Tok::Keyword(Kw::Else) {
            return Err(unsupported("loop else clause", self.peek_span()));
        }
        Ok(Stmt {
            kind: StmtKind::For { target, iter, body },
            span,
        })
    }

    fn def_stmt(&mut self) -> PResult<Stmt> {
        let span = self.peek_span();
        self.bump(); // def
        let name = match self.bump() {
            Token {
                tok: Tok::Name(name),
                ..
            } => name,
            token => return Err(syntax("expected function name", token.span)),
        };
        self.expect_op(Op::LParen, "'(' after function name")?;
        let mut params = Vec::new();
        if !self.eat_op(Op::RParen) {
            loop {
                let span = self.peek_span();
                match self.bump() {
                    Token {
                        tok: Tok::Name(param),
                        ..
                    } => {
                        if *self.peek() == Tok::Op(Op::Assign) {
                            return Err(unsupported("default parameter value", span));
                        }
                        if params.contains(&param) {
                            return Err(syntax(
                                format!("duplicate parameter {param:?}"),
                                span,
                            ));
                        }
                        params.push(param);
                    }
                    Token {
                        tok: Tok::Op(Op::Star),
                        ..
                    }
                    | Token {
                        tok: Tok::Op(Op::DoubleStar),
                        ..
                    } => return Err(unsupported("star parameter", span)),
                    token => return Err(syntax("expected parameter name", token.span)),
                }
                if self.eat_op(Op::RParen) {
                    break;
                }
                self.expect_op(Op::Comma, "',' between parameters")?;
                if self.eat_op(Op::RParen) {
                    break;
                }
            }
        }
        self.expect_op(Op::Colon, "':' after parameter list")?;
        self.fn_depth += 1;
        let saved_loops = std::mem::take(&mut self.loop_depth);
        let body = self.suite()?;
        self.loop_depth = saved_loops;
        self.fn_depth -= 1;
        Ok(Stmt {
            kind: StmtKind::FuncDef(FuncDef {
                name,
                params,
                body,
                span,
            }),
            span,
        })
    }

    /// Block body: either statements on the same line, or an indented block.
    fn suite(&mut self) -> PResult<Vec<Stmt>> {
        if matches!(self.peek(), Tok::Newline) {
            self.bump();
            let span = self.peek_span();
            if !matches!(self.peek(), Tok::Indent) {
                return Err(syntax("expected an indented block", span));
            }
            self.bump();
            let mut body = Vec::new();
            loop {
                match self.peek() {
                    Tok::Dedent => {
                        self.bump();
                        break;
                    }
                    Tok::Newline => {
                        self.bump();
                    }
                    Tok::Eof => break,
                    _ => body.extend(self.statement()?),
                }
            }
            Ok(body)
        } else {
            self.simple_stmt_line()
        }
    }

    fn target_list(&mut self) -> PResult<Target> {
        let span = self.peek_span();
        let mut targets = vec![self.single_target()?];
        let mut trailing_comma = false;
        while self.eat_op(Op::Comma) {
            if *self.peek() == Tok::Keyword(Kw::In) || *self.peek() == Tok::Op(Op::Assign) {
                trailing_comma = true;
                break;
            }
            targets.push(self.single_target()?);
        }
        if targets.len() == 1 && !trailing_comma {
            Ok(targets.pop().unwrap())
        } else {
            Ok(Target::Tuple(targets, span))
        }
    }

    fn single_target(&mut self) -> PResult<Target> {
        let span = self.peek_span();
        if self.eat_op(Op::LParen) {
            let inner = self.target_list()?;
            self.expect_op(Op::RParen, "')'")?;
            return Ok(inner);
        }
        let expr = self.atom_trailer()?;
        let _ = span;
        expr_to_target(expr)
    }

    /// Comma handling: `a, b` builds a tuple expression.
    fn testlist(&mut self) -> PResult<Expr> {
        let span = self.peek_span();
        let first = self.test()?;
        if *self.peek() != Tok::Op(Op::Comma) {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(Op::Comma) {
            if self.starts_expression() {
                items.push(self.test()?);
            } else {
                break;
            }
        }
        Ok(Expr {
            kind: ExprKind::Tuple(items),
            span,
        })
    }

    fn starts_expression(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Int(_)
                | Tok::Float(_)
                | Tok::Str(_)
                | Tok::FStr(_)
                | Tok::Name(_)
                | Tok::Keyword(Kw::True)
                | Tok::Keyword(Kw::False)
                | Tok::Keyword(Kw::None)
                | Tok::Keyword(Kw::Not)
                | Tok::Op(Op::LParen)
                | Tok::Op(Op::LBracket)
                | Tok::Op(Op::LBrace)
                | Tok::Op(Op::Plus)
                | Tok::Op(Op::Minus)
        )
    }

    fn test(&mut self) -> PResult<Expr> {
        let span = self.peek_span();
        self.enter(span)?;
        let result = self.test_inner(span);
        self.leave();
        result
    }

    fn test_inner(&mut self, span: Span) -> PResult<Expr> {
        let body = self.or_test()?;
        if self.eat_kw(Kw::If) {
            let test = self.or_test()?;
            if !self.eat_kw(Kw::Else) {
                return Err(syntax(
                    "conditional expression requires 'else'",
                    self.peek_span(),
                ));
            }
            let orelse = self.test()?;
            return Ok(Expr {
                kind: ExprKind::Conditional {
                    test: Box::new(test),
                    body: Box::new(body),
                    orelse: Box::new(orelse),
                },
                span,
            });
        }
        Ok(body)
    }

    fn or_test(&mut self) -> PResult<Expr> {
        let span = self.peek_span();
        let first = self.and_test()?;
        if *self.peek() != Tok::Keyword(Kw::Or) {
            return Ok(first);
        }
        let mut operands = vec![first];
        while self.eat_kw(Kw::Or) {
            operands.push(self.and_test()?);
        }
        Ok(Expr {
            kind: ExprKind::BoolChain {
                op: BoolOp::Or,
                operands,
            },
            span,
        })
    }

    fn and_test(&mut self) -> PResult<Expr> {
        let span = self.peek_span();
        let first = self.not_test()?;
        if *self.peek() != Tok::Keyword(Kw::And) {
            return Ok(first);
        }
        let mut operands = vec![first];
        while self.eat_kw(Kw::And) {
            operands.push(self.not_test()?);
        }
        Ok(Expr {
            kind: ExprKind::BoolChain {
                op: BoolOp::And,
                operands,
            },
            span,
        })
    }

    fn not_test(&mut self) -> PResult<Expr> {
        let span = self.peek_span();
        if self.eat_kw(Kw::Not) {
            self.enter(span)?;
            let operand = self.not_test()?;
            self.leave();
            return Ok(Expr {
                kind: ExprKind::Unary {
                    op: UnaryOp::Not,
                    operand: Box::new(operand),
                },
                span,
            });
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let span = self.peek_span();
        let first = self.arith()?;
        let mut rest = Vec::new();
        loop {
            let op = match self.peek() {
                Tok::Reserved(word) => return Err(unsupported(word, self.peek_span())),
                Tok::Op(Op::Eq) => CmpOp::Eq,
                Tok::Op(Op::Ne) => CmpOp::Ne,
                Tok::Op(Op::Lt) => CmpOp::Lt,
                Tok::Op(Op::Le) => CmpOp::Le,
                Tok::Op(Op::Gt) => CmpOp::Gt,
                Tok::Op(Op::Ge) => CmpOp::Ge,
                Tok::Keyword(Kw::In) => CmpOp::In,
                Tok::Keyword(Kw::Not) => {
                    self.bump();
                    if !self.eat_kw(Kw::In) {
                        return Err(syntax("expected 'in' after 'not'", self.peek_span()));
                    }
                    rest.push((CmpOp::NotIn, self.arith()?));
                    continue;
                }
                _ => break,
            };
            self.bump();
            rest.push((op, self.arith()?));
        }
        if rest.is_empty() {
            return Ok(first);
        }
        Ok(Expr {
            kind: ExprKind::Compare {
                first: Box::new(first),
                rest,
            },
            span,
        })
    }

    fn arith(&mut self) -> PResult<Expr> {
        let mut left = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op(Op::Plus) => BinOp::Add,
                Tok::Op(Op::Minus) => BinOp::Sub,
                _ => break,
            };
            let span = self.peek_span();
            self.bump();
            let right = self.term()?;
            left = Expr {
                kind: ExprKind::Binary {
                    op,
                    left: Box::new(left),
                    right: Box::new(right),
                },
                span,
            };
        }
        Ok(left)
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut left = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Op(Op::Star) => BinOp::Mul,
                Tok::Op(Op::Slash) => BinOp::Div,
                Tok::Op(Op::DoubleSlash) => BinOp::FloorDiv,
                Tok::Op(Op::Percent) => BinOp::Mod,
                _ => break,
            };
            let span = self.peek_span();
            self.bump();
            let right = self.factor()?;
            left = Expr {
                kind: ExprKind::Binary {
                    op,
                    left: Box::new(left),
                    right: Box::new(right),
                },
                span,
            };
        }
        Ok(left)
    }

    fn factor(&mut self) -> PResult<Expr> {
        let span = self.peek_span();
        let op = match self.peek() {
            Tok::Op(Op::Minus) => Some(UnaryOp::Neg),
            Tok::Op(Op::Plus) => Some(UnaryOp::Pos),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            self.enter(span)?;
            let operand = self.factor()?;
            self.leave();
            return Ok(Expr {
                kind: ExprKind::Unary {
                    op,
                    operand: Box::new(operand),
                },
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.atom_trailer()?;
        if *self.peek() == Tok::Op(Op::DoubleStar) {
            let span = self.peek_span();
            self.bump();
            // `**` is right-associative and binds tighter than unary minus
            // on its left, looser on its right.
            let exponent = self.factor()?;
            return Ok(Expr {
                kind: ExprKind::Binary {
                    op: BinOp::Pow,
                    left: Box::new(base),
                    right: Box::new(exponent),
                },
                span,
            });
        }
        Ok(base)
    }

    fn atom_trailer(&mut self) -> PResult<Expr> {
        let mut expr = self.atom()?;
        loop {
            let span = self.peek_span();
            if self.eat_op(Op::LParen) {
                let mut args = Vec::new();
                if !self.eat_op(Op::RParen) {
                    loop {
                        // Reject keyword arguments explicitly: `name=value`.
                        if let Tok::Name(_) = self.peek() {
                            if self.tokens.get(self.pos + 1).map(|t| &t.tok)
                                == Some(&Tok::Op(Op::Assign))
                            {
                                return Err(unsupported("keyword argument", self.peek_span()));
                            }
                        }
                        if *self.peek() == Tok::Op(Op::Star)
                            || *self.peek() == Tok::Op(Op::DoubleStar)
                        {
                            return Err(unsupported("star argument", self.peek_span()));
                        }
                        args.push(self.test()?);
                        if self.eat_op(Op::RParen) {
                            break;
                        }
                        self.expect_op(Op::Comma, "',' between arguments")?;
                        if self.eat_op(Op::RParen) {
                            break;
                        }
                    }
                }
                expr = Expr {
                    kind: ExprKind::Call {
                        callee: Box::new(expr),
                        args,
                    },
                    span,
                };
            } else if self.eat_op(Op::LBracket) {
                let index = self.test()?;
                if *self.peek() == Tok::Op(Op::Colon) {
                    return Err(unsupported("slice", self.peek_span()));
                }
                self.expect_op(Op::RBracket, "']'")?;
                expr = Expr {
                    kind: ExprKind::Subscript {
                        base: Box::new(expr),
                        index: Box::new(index),
                    },
                    span,
                };
            } else if self.eat_op(Op::Dot) {
                match self.bump() {
                    Token {
                        tok: Tok::Name(name),
                        ..
                    } => {
                        expr = Expr {
                            kind: ExprKind::Attribute {
                                base: Box::new(expr),
                                name,
                            },
                            span,
                        };
                    }
                    token => return Err(syntax("expected attribute name", token.span)),
                }
            } else {
                break;
            }
        }
        Ok(expr)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.peek_span();
        self.enter(span)?;
        let result = self.atom_inner(span);
        self.leave();
        result
    }

    fn atom_inner(&mut self, span: Span) -> PResult<Expr> {
        match self.bump().tok {
            Tok::Int(value) => Ok(Expr {
                kind: ExprKind::Int(value),
                span,
            }),
            Tok::Float(value) => Ok(Expr {
                kind: ExprKind::Float(value),
                span,
            }),
            Tok::Str(mut value) => {
                // Adjacent string literals concatenate.
                while let Tok::Str(next) = self.peek() {
                    value.push_str(next);
                    self.bump();
                }
                Ok(Expr {
                    kind: ExprKind::Str(value),
                    span,
                })
            }
            Tok::FStr(raw) => {
                let parts = split_fstring(&raw, span)?;
                Ok(Expr {
                    kind: ExprKind::FString(parts),
                    span,
                })
            }
            Tok::Name(name) => Ok(Expr {
                kind: ExprKind::Name(name),
                span,
            }),
            Tok::Keyword(Kw::True) => Ok(Expr {
                kind: ExprKind::Bool(true),
                span,
            }),
            Tok::Keyword(Kw::False) => Ok(Expr {
                kind: ExprKind::Bool(false),
                span,
            }),
            Tok::Keyword(Kw::None) => Ok(Expr {
                kind: ExprKind::None,
                span,
            }),
            Tok::Op(Op::LParen) => {
                if self.eat_op(Op::RParen) {
                    return Ok(Expr {
                        kind: ExprKind::Tuple(Vec::new()),
                        span,
                    });
                }
                let first = self.test()?;
                if *self.peek() == Tok::Op(Op::Comma) {
                    let mut items = vec![first];
                    while self.eat_op(Op::Comma) {
                        if *self.peek() == Tok::Op(Op::RParen) {
                            break;
                        }
                        items.push(self.test()?);
                    }
                    self.expect_op(Op::RParen, "')'")?;
                    return Ok(Expr {
                        kind: ExprKind::Tuple(items),
                        span,
                    });
                }
                self.expect_op(Op::RParen, "')'")?;
                Ok(first)
            }
            Tok::Op(Op::LBracket) => {
                if self.eat_op(Op::RBracket) {
                    return Ok(Expr {
                        kind: ExprKind::List(Vec::new()),
                        span,
                    });
                }
                let first = self.test()?;
                if *self.peek() == Tok::Keyword(Kw::For) {
                    self.bump();
                    let target = self.target_list()?;
                    if !self.eat_kw(Kw::In) {
                        return Err(syntax("expected 'in' in comprehension", self.peek_span()));
                    }
                    let iter = self.or_test()?;
                    let filter = if self.eat_kw(Kw::If) {
                        Some(Box::new(self.or_test()?))
                    } else {
                        None
                    };
                    if *self.peek() == Tok::Keyword(Kw::For)
                        || *self.peek() == Tok::Keyword(Kw::If)
                    {
                        return Err(unsupported(
                            "multiple comprehension clauses",
                            self.peek_span(),
                        ));
                    }
                    self.expect_op(Op::RBracket, "']'")?;
                    return Ok(Expr {
                        kind: ExprKind::ListComp {
                            element: Box::new(first),
                            target: Box::new(target),
                            iter: Box::new(iter),
                            filter,
                        },
                        span,
                    });
                }
                let mut items = vec![first];
                while self.eat_op(Op::Comma) {
                    if *self.peek() == Tok::Op(Op::RBracket) {
                        break;
                    }
                    items.push(self.test()?);
                }
                self.expect_op(Op::RBracket, "']'")?;
                Ok(Expr {
                    kind: ExprKind::List(items),
                    span,
                })
            }
            Tok::Op(Op::LBrace) => Err(unsupported("dict or set display", span)),
            Tok::Reserved(word) => Err(unsupported(word, span)),
            Tok::Keyword(kw) => Err(syntax(format!("unexpected keyword {kw:?}"), span)),
            other => Err(syntax(format!("unexpected token {other:?}"), span)),
        }
    }
}

fn expr_to_target(expr: Expr) -> PResult<Target> {
    match expr.kind {
        ExprKind::Name(name) => Ok(Target::Name(name, expr.span)),
        ExprKind::Tuple(items) | ExprKind::List(items) => {
            let targets = items
                .into_iter()
                .map(expr_to_target)
                .collect::<PResult<Vec<_>>>()?;
            if targets.is_empty() {
                return Err(syntax("cannot assign to empty target list", expr.span));
            }
            Ok(Target::Tuple(targets, expr.span))
        }
        ExprKind::Subscript { base, index } => Ok(Target::Subscript {
            base: *base,
            index: *index,
            span: expr.span,
        }),
        ExprKind::Attribute { .. } => Err(unsupported("attribute assignment", expr.span)),
        _ => Err(syntax("cannot assign to this expression", expr.span)),
    }
}

/// Splits an f-string body into literal chunks and `{expression}` holes.
/// The expression text is re-parsed with a fresh lexer.
fn split_fstring(raw: &str, span: Span) -> PResult<Vec<FStringPart>> {
    let mut parts = Vec::new();
    let mut literal = String::new();
    let chars: Vec<char> = raw.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '{' if chars.get(i + 1) == Some(&'{') => {
                literal.push('{');
                i += 2;
            }
            '}' if chars.get(i + 1) == Some(&'}') => {
                literal.push('}');
                i += 2;
            }
            '}' => {
                return Err(syntax("single '}' in f-string", span));
            }
            '{' => {
                if !literal.is_empty() {
                    parts.push(FStringPart::Literal(std::mem::take(&mut literal)));
                }
                let mut depth = 1usize;
                let mut quote: Option<char> = None;
                let start = i + 1;
                let mut j = start;
                while j < chars.len() {
                    let c = chars[j];
                    match quote {
                        Some(q) => {
                            if c == q {
                                quote = None;
                            }
                        }
                        None => match c {
                            '\'' | '"' => quote = Some(c),
                            '{' | '[' | '(' => depth += 1,
                            ']' | ')' => depth = depth.saturating_sub(1),
                            '}' => {
                                depth -= 1;
                                if depth == 0 {
                                    break;
                                }
                            }
                            ':' if depth == 1 => {
                                return Err(unsupported("f-string format spec", span));
                            }
                            '!' if depth == 1 && chars.get(j + 1) != Some(&'=') => {
                                return Err(unsupported("f-string conversion", span));
                            }
                            _ => {}
                        },
                    }
                    j += 1;
                }
                if j >= chars.len() {
                    return Err(syntax("unterminated '{' in f-string", span));
                }
                let inner: String = chars[start..j].iter().collect();
                if inner.trim().is_empty() {
                    return Err(syntax("empty expression in f-string", span));
                }
                let expr = parse_embedded_expr(&inner, span)?;
                parts.push(FStringPart::Expr(expr));
                i = j + 1;
            }
            c => {
                literal.push(c);
                i += 1;
            }
        }
    }
    if !literal.is_empty() {
        parts.push(FStringPart::Literal(literal));
    }
    Ok(parts)
}

fn parse_embedded_expr(text: &str, span: Span) -> PResult<Expr> {
    let tokens = Lexer::new(text).tokenize().map_err(|mut e| {
        e.span = span;
        e
    })?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        depth: 0,
        fn_depth: 1,
        loop_depth: 0,
    };
    let expr = parser.testlist().map_err(|mut e| {
        e.span = span;
        e
    })?;
    if !matches!(parser.peek(), Tok::Newline | Tok::Eof) {
        return Err(syntax("trailing tokens in f-string expression", span));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ok(src: &str) -> Ast {
        parse_module(src).unwrap()
    }

    fn parse_err(src: &str) -> InterpreterError {
        parse_module(src).unwrap_err()
    }

    #[test]
    fn assignment_parses() {
        let ast = parse_ok("x = 1 + 2\n");
        assert_eq!(ast.body.len(), 1);
        match &ast.body[0].kind {
            StmtKind::Assign { targets, value } => {
                assert_eq!(targets.len(), 1);
                assert!(matches!(value.kind, ExprKind::Binary { op: BinOp::Add, .. }));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn broken_def_is_a_syntax_error_on_line_1() {
        let e = parse_err("def f(:");
        assert_eq!(e.kind, InterpreterErrorKind::Syntax);
        assert_eq!(e.span.line, 1);
    }

    #[test]
    fn import_is_unsupported() {
        let e = parse_err("import os\n");
        assert_eq!(e.kind, InterpreterErrorKind::Unsupported);
        assert_eq!(e.message, "import");
    }

    #[test]
    fn class_try_with_lambda_are_unsupported() {
        for (src, construct) in [
            ("class A:\n    pass\n", "class"),
            ("try:\n    pass\n", "try"),
            ("with open() as f:\n    pass\n", "with"),
            ("f = lambda x: x\n", "lambda"),
            ("x = {1: 2}\n", "dict or set display"),
            ("x = [i for i in a for j in b]\n", "multiple comprehension clauses"),
        ] {
            let e = parse_err(src);
            assert_eq!(e.kind, InterpreterErrorKind::Unsupported, "{src}");
            assert_eq!(e.message, construct, "{src}");
        }
    }

    #[test]
    fn return_outside_function_is_syntax() {
        let e = parse_err("return 1\n");
        assert_eq!(e.kind, InterpreterErrorKind::Syntax);
        assert!(e.message.contains("return"));
    }

    #[test]
    fn break_outside_loop_is_syntax() {
        let e = parse_err("def f():\n    break\n");
        assert_eq!(e.kind, InterpreterErrorKind::Syntax);
    }

    #[test]
    fn chained_comparison_parses() {
        let ast = parse_ok("x = 1 < 2 < 3\n");
        match &ast.body[0].kind {
            StmtKind::Assign { value, .. } => match &value.kind {
                ExprKind::Compare { rest, .. } => assert_eq!(rest.len(), 2),
                other => panic!("unexpected: {other:?}"),
            },
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn comprehension_parses() {
        parse_ok("rooms = [r for r in get_all_rooms() if r.startswith('conf')]\n");
    }

    #[test]
    fn fstring_parses_into_parts() {
        let ast = parse_ok("msg = f\"found {count} items\"\n");
        match &ast.body[0].kind {
            StmtKind::Assign { value, .. } => match &value.kind {
                ExprKind::FString(parts) => assert_eq!(parts.len(), 3),
                other => panic!("unexpected: {other:?}"),
            },
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn fstring_format_spec_is_unsupported() {
        let e = parse_err("x = f\"{v:.2f}\"\n");
        assert_eq!(e.kind, InterpreterErrorKind::Unsupported);
    }

    #[test]
    fn keyword_arguments_are_unsupported() {
        let e = parse_err("ask('a', 'b', options=['c'])\n");
        assert_eq!(e.kind, InterpreterErrorKind::Unsupported);
        assert_eq!(e.message, "keyword argument");
    }

    #[test]
    fn tuple_unpacking_in_for_parses() {
        parse_ok("for i, room in enumerate(rooms):\n    say(room)\n");
    }

    #[test]
    fn inline_suite_parses() {
        parse_ok("if x: say('hi')\nelse: say('no')\n");
    }

    #[test]
    fn deep_nesting_is_rejected() {
        let src = format!("x = {}1{}\n", "(".repeat(300), ")".repeat(300));
        let e = parse_err(&src);
        assert_eq!(e.kind, InterpreterErrorKind::Syntax);
        assert!(e.message.contains("nesting"));
    }

    #[test]
    fn is_operator_is_unsupported() {
        let e = parse_err("x = a is None\n");
        assert_eq!(e.kind, InterpreterErrorKind::Unsupported);
        assert_eq!(e.message, "is");
    }
}
