//! Indentation-sensitive lexer. Emits NEWLINE/INDENT/DEDENT tokens the way
//! the source language family does, suppressing them inside brackets.

use super::ast::Span;
use super::{InterpreterError, InterpreterErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Int(i64),
    Float(f64),
    Str(String),
    /// Raw body of an f-string literal; brace splitting happens in the parser.
    FStr(String),
    Name(String),
    Keyword(Kw),
    /// A recognized keyword of the wider language family that this subset
    /// rejects; carried so the parser can report the construct by name.
    Reserved(&'static str),
    Op(Op),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kw {
    Def,
    If,
    Elif,
    Else,
    For,
    While,
    In,
    Not,
    And,
    Or,
    Return,
    Pass,
    Break,
    Continue,
    True,
    False,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Plus,
    Minus,
    Star,
    DoubleStar,
    Slash,
    DoubleSlash,
    Percent,
    Assign,
    PlusAssign,
    MinusAssign,
    StarAssign,
    SlashAssign,
    DoubleSlashAssign,
    PercentAssign,
    DoubleStarAssign,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Dot,
    Semicolon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const RESERVED: &[&str] = &[
    "import", "from", "class", "try", "except", "finally", "with", "as", "lambda", "yield",
    "global", "nonlocal", "del", "raise", "assert", "async", "await", "is",
];

fn keyword(word: &str) -> Option<Kw> {
    Some(match word {
        "def" => Kw::Def,
        "if" => Kw::If,
        "elif" => Kw::Elif,
        "else" => Kw::Else,
        "for" => Kw::For,
        "while" => Kw::While,
        "in" => Kw::In,
        "not" => Kw::Not,
        "and" => Kw::And,
        "or" => Kw::Or,
        "return" => Kw::Return,
        "pass" => Kw::Pass,
        "break" => Kw::Break,
        "continue" => Kw::Continue,
        "True" => Kw::True,
        "False" => Kw::False,
        "None" => Kw::None,
        _ => return None,
    })
}

pub struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    indent_stack: Vec<u32>,
    bracket_depth: usize,
    tokens: Vec<Token>,
    at_line_start: bool,
}

fn err(kind: InterpreterErrorKind, message: impl Into<String>, span: Span) -> InterpreterError {
    InterpreterError {
        kind,
        message: message.into(),
        span,
    }
}

impl Lexer {
    pub fn new(src: &str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            indent_stack: vec![0],
            bracket_depth: 0,
            tokens: Vec::new(),
            at_line_start: true,
        }
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>, InterpreterError> {
        while self.pos < self.chars.len() {
            if self.at_line_start && self.bracket_depth == 0 {
                self.handle_indentation()?;
                if self.pos >= self.chars.len() {
                    break;
                }
            }
            let c = self.peek();
            match c {
                '\n' => {
                    self.advance();
                    if self.bracket_depth == 0 {
                        self.emit_newline();
                    }
                }
                '#' => {
                    while self.pos < self.chars.len() && self.peek() != '\n' {
                        self.advance();
                    }
                }
                ' ' | '\t' | '\r' => {
                    self.advance();
                }
                '\\' => {
                    // Explicit line continuation.
                    let span = self.span();
                    self.advance();
                    while self.pos < self.chars.len() && matches!(self.peek(), ' ' | '\t' | '\r') {
                        self.advance();
                    }
                    if self.pos < self.chars.len() && self.peek() == '\n' {
                        self.advance();
                    } else {
                        return Err(err(
                            InterpreterErrorKind::Syntax,
                            "unexpected character after line continuation",
                            span,
                        ));
                    }
                }
                '\'' | '"' => self.string(false)?,
                c if c.is_ascii_digit() => self.number()?,
                '.' if self.peek_at(1).map(|c| c.is_ascii_digit()).unwrap_or(false) => {
                    self.number()?
                }
                c if c.is_alphabetic() || c == '_' => self.word()?,
                _ => self.operator()?,
            }
        }
        // Close any open logical line and outstanding indents.
        self.emit_newline();
        let end = self.span();
        while self.indent_stack.len() > 1 {
            self.indent_stack.pop();
            self.tokens.push(Token {
                tok: Tok::Dedent,
                span: end,
            });
        }
        self.tokens.push(Token {
            tok: Tok::Eof,
            span: end,
        });
        Ok(self.tokens)
    }

    fn handle_indentation(&mut self) -> Result<(), InterpreterError> {
        loop {
            let mut width: u32 = 0;
            let line_start = self.pos;
            while self.pos < self.chars.len() {
                match self.peek() {
                    ' ' => {
                        width += 1;
                        self.advance();
                    }
                    '\t' => {
                        width = (width / 8 + 1) * 8;
                        self.advance();
                    }
                    '\r' => {
                        self.advance();
                    }
                    _ => break,
                }
            }
            if self.pos >= self.chars.len() {
                return Ok(());
            }
            match self.peek() {
                '\n' => {
                    // Blank line: no tokens, no indent change.
                    self.advance();
                    continue;
                }
                '#' => {
                    while self.pos < self.chars.len() && self.peek() != '\n' {
                        self.advance();
                    }
                    continue;
                }
                _ => {
                    let _ = line_start;
                    let current = *self.indent_stack.last().unwrap();
                    let span = self.span();
                    if width > current {
                        self.indent_stack.push(width);
                        self.tokens.push(Token {
                            tok: Tok::Indent,
                            span,
                        });
                    } else if width < current {
                        while width < *self.indent_stack.last().unwrap() {
                            self.indent_stack.pop();
                            self.tokens.push(Token {
                                tok: Tok::Dedent,
                                span,
                            });
                        }
                        if width != *self.indent_stack.last().unwrap() {
                            return Err(err(
                                InterpreterErrorKind::Syntax,
                                "unindent does not match any outer indentation level",
                                span,
                            ));
                        }
                    }
                    self.at_line_start = false;
                    return Ok(());
                }
            }
        }
    }

    fn emit_newline(&mut self) {
        if matches!(
            self.tokens.last().map(|t| &t.tok),
            None | Some(Tok::Newline) | Some(Tok::Indent) | Some(Tok::Dedent)
        ) {
            self.at_line_start = true;
            return;
        }
        let span = self.span();
        self.tokens.push(Token {
            tok: Tok::Newline,
            span,
        });
        self.at_line_start = true;
    }

    fn peek(&self) -> char {
        self.chars[self.pos]
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn advance(&mut self) -> char {
        let c = self.chars[self.pos];
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }

    fn push(&mut self, tok: Tok, span: Span) {
        self.tokens.push(Token { tok, span });
    }

    fn word(&mut self) -> Result<(), InterpreterError> {
        let span = self.span();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.peek().is_alphanumeric() || self.peek() == '_')
        {
            self.advance();
        }
        let word: String = self.chars[start..self.pos].iter().collect();
        // String prefixes stick to an immediately following quote.
        if self.pos < self.chars.len() && matches!(self.peek(), '\'' | '"') {
            match word.as_str() {
                "f" | "F" => {
                    self.string(true)?;
                    return Ok(());
                }
                "r" | "R" | "b" | "B" | "rb" | "br" | "u" | "U" | "fr" | "rf" => {
                    return Err(err(
                        InterpreterErrorKind::Unsupported,
                        format!("string prefix '{word}'"),
                        span,
                    ));
                }
                _ => {}
            }
        }
        if let Some(kw) = keyword(&word) {
            self.push(Tok::Keyword(kw), span);
        } else if let Some(reserved) = RESERVED.iter().find(|r| **r == word) {
            self.push(Tok::Reserved(reserved), span);
        } else {
            self.push(Tok::Name(word), span);
        }
        Ok(())
    }

    fn number(&mut self) -> Result<(), InterpreterError> {
        let span = self.span();
        let start = self.pos;
        let mut is_float = false;
        while self.pos < self.chars.len() && self.peek().is_ascii_digit() {
            self.advance();
        }
        if self.pos < self.chars.len() && self.peek() == '.' {
            // A trailing method call like `1 .foo` is not in the subset, so a
            // dot after digits always starts a fraction here.
            if self.peek_at(1).map(|c| c.is_ascii_digit()).unwrap_or(true) {
                is_float = true;
                self.advance();
                while self.pos < self.chars.len() && self.peek().is_ascii_digit() {
                    self.advance();
                }
            }
        }
        if self.pos < self.chars.len() && matches!(self.peek(), 'e' | 'E') {
            let mut lookahead = 1;
            if matches!(self.peek_at(1), Some('+') | Some('-')) {
                lookahead = 2;
            }
            if self
                .peek_at(lookahead)
                .map(|c| c.is_ascii_digit())
                .unwrap_or(false)
            {
                is_float = true;
                for _ in 0..=lookahead {
                    self.advance();
                }
                while self.pos < self.chars.len() && self.peek().is_ascii_digit() {
                    self.advance();
                }
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        if is_float {
            let value: f64 = text
                .parse()
                .map_err(|_| err(InterpreterErrorKind::Syntax, "invalid float literal", span))?;
            self.push(Tok::Float(value), span);
        } else {
            let value: i64 = text.parse().map_err(|_| {
                err(
                    InterpreterErrorKind::Syntax,
                    "integer literal out of range",
                    span,
                )
            })?;
            self.push(Tok::Int(value), span);
        }
        Ok(())
    }

    fn string(&mut self, is_fstring: bool) -> Result<(), InterpreterError> {
        let span = self.span();
        let quote = self.advance();
        let triple = self.peek_at(0) == Some(quote) && self.peek_at(1) == Some(quote);
        if triple {
            self.advance();
            self.advance();
        }
        let mut value = String::new();
        loop {
            if self.pos >= self.chars.len() {
                return Err(err(
                    InterpreterErrorKind::Syntax,
                    "unterminated string literal",
                    span,
                ));
            }
            let c = self.peek();
            if c == quote {
                if triple {
                    if self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote) {
                        self.advance();
                        self.advance();
                        self.advance();
                        break;
                    }
                    value.push(self.advance());
                } else {
                    self.advance();
                    break;
                }
            } else if c == '\n' && !triple {
                return Err(err(
                    InterpreterErrorKind::Syntax,
                    "unterminated string literal",
                    span,
                ));
            } else if c == '\\' {
                self.advance();
                if self.pos >= self.chars.len() {
                    return Err(err(
                        InterpreterErrorKind::Syntax,
                        "unterminated string literal",
                        span,
                    ));
                }
                let escaped = self.advance();
                if is_fstring && matches!(escaped, '{' | '}') {
                    // Keep the backslash out of it; brace escaping in
                    // f-strings is done by doubling.
                    value.push(escaped);
                    continue;
                }
                match escaped {
                    'n' => value.push('\n'),
                    't' => value.push('\t'),
                    'r' => value.push('\r'),
                    '0' => value.push('\0'),
                    '\\' => value.push('\\'),
                    '\'' => value.push('\''),
                    '"' => value.push('"'),
                    '\n' => {}
                    other => {
                        // Unknown escapes keep the backslash, as the source
                        // language family does.
                        value.push('\\');
                        value.push(other);
                    }
                }
            } else {
                value.push(self.advance());
            }
        }
        if is_fstring {
            self.push(Tok::FStr(value), span);
        } else {
            self.push(Tok::Str(value), span);
        }
        Ok(())
    }

    fn operator(&mut self) -> Result<(), InterpreterError> {
        let span = self.span();
        let c = self.advance();
        let next = self.peek_at(0);
        let two = |lexer: &mut Self, op: Op| {
            lexer.advance();
            op
        };
        let op = match (c, next) {
            ('*', Some('*')) => {
                self.advance();
                if self.peek_at(0) == Some('=') {
                    two(self, Op::DoubleStarAssign)
                } else {
                    Op::DoubleStar
                }
            }
            ('/', Some('/')) => {
                self.advance();
                if self.peek_at(0) == Some('=') {
                    two(self, Op::DoubleSlashAssign)
                } else {
                    Op::DoubleSlash
                }
            }
            ('+', Some('=')) => two(self, Op::PlusAssign),
            ('-', Some('=')) => two(self, Op::MinusAssign),
            ('*', Some('=')) => two(self, Op::StarAssign),
            ('/', Some('=')) => two(self, Op::SlashAssign),
            ('%', Some('=')) => two(self, Op::PercentAssign),
            ('=', Some('=')) => two(self, Op::Eq),
            ('!', Some('=')) => two(self, Op::Ne),
            ('<', Some('=')) => two(self, Op::Le),
            ('>', Some('=')) => two(self, Op::Ge),
            ('+', _) => Op::Plus,
            ('-', _) => Op::Minus,
            ('*', _) => Op::Star,
            ('/', _) => Op::Slash,
            ('%', _) => Op::Percent,
            ('=', _) => Op::Assign,
            ('<', _) => Op::Lt,
            ('>', _) => Op::Gt,
            ('(', _) => Op::LParen,
            (')', _) => Op::RParen,
            ('[', _) => Op::LBracket,
            (']', _) => Op::RBracket,
            ('{', _) => Op::LBrace,
            ('}', _) => Op::RBrace,
            (',', _) => Op::Comma,
            (':', _) => Op::Colon,
            ('.', _) => Op::Dot,
            (';', _) => Op::Semicolon,
            _ => {
                return Err(err(
                    InterpreterErrorKind::Syntax,
                    format!("unexpected character {c:?}"),
                    span,
                ));
            }
        };
        match op {
            Op::LParen | Op::LBracket | Op::LBrace => self.bracket_depth += 1,
            Op::RParen | Op::RBracket | Op::RBrace => {
                self.bracket_depth = self.bracket_depth.saturating_sub(1)
            }
            _ => {}
        }
        self.push(Tok::Op(op), span);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        Lexer::new(src)
            .tokenize()
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect()
    }

    #[test]
    fn lexes_indented_block() {
        let tokens = toks("if x:\n    y = 1\n");
        assert!(tokens.contains(&Tok::Indent));
        assert!(tokens.contains(&Tok::Dedent));
    }

    #[test]
    fn brackets_suppress_newlines() {
        let tokens = toks("x = [1,\n     2]\n");
        let newlines = tokens.iter().filter(|t| **t == Tok::Newline).count();
        assert_eq!(newlines, 1);
    }

    #[test]
    fn blank_lines_and_comments_do_not_indent() {
        let tokens = toks("x = 1\n\n# comment\ny = 2\n");
        assert!(!tokens.contains(&Tok::Indent));
    }

    #[test]
    fn fstring_token_keeps_raw_body() {
        let tokens = toks("f\"hello {name}\"\n");
        assert!(tokens.contains(&Tok::FStr("hello {name}".to_string())));
    }

    #[test]
    fn reserved_words_are_flagged() {
        let tokens = toks("import os\n");
        assert!(matches!(tokens[0], Tok::Reserved("import")));
    }

    #[test]
    fn triple_quoted_strings_span_lines() {
        let tokens = toks("x = \"\"\"a\nб\"\"\"\n");
        assert!(tokens.contains(&Tok::Str("a\nб".to_string())));
    }

    #[test]
    fn mismatched_dedent_is_a_syntax_error() {
        let e = Lexer::new("if x:\n        a = 1\n    b = 2\n")
            .tokenize()
            .unwrap_err();
        assert_eq!(e.kind, InterpreterErrorKind::Syntax);
    }
}
