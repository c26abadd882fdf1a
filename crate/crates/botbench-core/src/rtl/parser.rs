//! Parser for the concrete check grammar (see `docs/rtl_grammar.md`).
//!
//! ```text
//! check    := clause (";" clause)* [";"]
//! clause   := LABEL ":" formula ("|" formula)*
//! formula  := or ; or := and ("||" and)* ; and := until ("&" until)*
//! until    := unary ("U" until)?
//! unary    := ("F" | "G" | "N" | "!") unary | primary
//! primary  := "(" formula ")" | derived | atom
//! derived  := "seq(" formula ("," formula)+ ")" | "never(" formula ")"
//!           | "at_start(" formula ")" | "at_end(" formula ")"
//!           | "implies_then(" formula "," formula ")" | "visit_all(" regex ")"
//! atom     := SKILL "(" fieldpat ("," fieldpat)* ")" | "loc(" regex ")"
//!           | "first" | "last"
//! fieldpat := [FIELD "~"] regex ; regex := "/" pattern "/"
//! ```

use std::fmt;

use thiserror::Error;

use crate::sim::SkillKind;
use crate::world::Pattern;

use super::{AtomPredicate, CompletionCategory, RtlCheck, RtlClause, RtlFormula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {col}: {message}")]
pub struct RtlParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Regex(String),
    Temporal(char), // F G N U
    Bang,
    Amp,
    OrOr,
    Pipe,
    LParen,
    RParen,
    Comma,
    Semicolon,
    Colon,
    Tilde,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(name) => write!(f, "'{name}'"),
            Tok::Regex(_) => f.write_str("regex"),
            Tok::Temporal(op) => write!(f, "'{op}'"),
            Tok::Bang => f.write_str("'!'"),
            Tok::Amp => f.write_str("'&'"),
            Tok::OrOr => f.write_str("'||'"),
            Tok::Pipe => f.write_str("'|'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::Comma => f.write_str("','"),
            Tok::Semicolon => f.write_str("';'"),
            Tok::Colon => f.write_str("':'"),
            Tok::Tilde => f.write_str("'~'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Token {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(text: &str) -> Result<Vec<Token>, RtlParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;
    macro_rules! push {
        ($tok:expr, $line:expr, $col:expr) => {
            tokens.push(Token {
                tok: $tok,
                line: $line,
                col: $col,
            })
        };
    }
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let advance = |i: &mut usize, line: &mut u32, col: &mut u32| {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => advance(&mut i, &mut line, &mut col),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    advance(&mut i, &mut line, &mut col);
                }
            }
            '/' => {
                advance(&mut i, &mut line, &mut col);
                let mut body = String::new();
                loop {
                    if i >= chars.len() || chars[i] == '\n' {
                        return Err(RtlParseError {
                            line: tline,
                            col: tcol,
                            message: "unterminated regex literal".to_string(),
                        });
                    }
                    if chars[i] == '\\' && i + 1 < chars.len() && chars[i + 1] == '/' {
                        body.push('/');
                        advance(&mut i, &mut line, &mut col);
                        advance(&mut i, &mut line, &mut col);
                        continue;
                    }
                    if chars[i] == '/' {
                        advance(&mut i, &mut line, &mut col);
                        break;
                    }
                    body.push(chars[i]);
                    advance(&mut i, &mut line, &mut col);
                }
                push!(Tok::Regex(body), tline, tcol);
            }
            '!' => {
                advance(&mut i, &mut line, &mut col);
                push!(Tok::Bang, tline, tcol);
            }
            '&' => {
                advance(&mut i, &mut line, &mut col);
                push!(Tok::Amp, tline, tcol);
            }
            '|' => {
                advance(&mut i, &mut line, &mut col);
                if i < chars.len() && chars[i] == '|' {
                    advance(&mut i, &mut line, &mut col);
                    push!(Tok::OrOr, tline, tcol);
                } else {
                    push!(Tok::Pipe, tline, tcol);
                }
            }
            '(' => {
                advance(&mut i, &mut line, &mut col);
                push!(Tok::LParen, tline, tcol);
            }
            ')' => {
                advance(&mut i, &mut line, &mut col);
                push!(Tok::RParen, tline, tcol);
            }
            ',' => {
                advance(&mut i, &mut line, &mut col);
                push!(Tok::Comma, tline, tcol);
            }
            ';' => {
                advance(&mut i, &mut line, &mut col);
                push!(Tok::Semicolon, tline, tcol);
            }
            ':' => {
                advance(&mut i, &mut line, &mut col);
                push!(Tok::Colon, tline, tcol);
            }
            '~' => {
                advance(&mut i, &mut line, &mut col);
                push!(Tok::Tilde, tline, tcol);
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut word = String::new();
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    word.push(chars[i]);
                    advance(&mut i, &mut line, &mut col);
                }
                if word.len() == 1 && matches!(word.as_str(), "F" | "G" | "N" | "U") {
                    push!(Tok::Temporal(word.chars().next().unwrap()), tline, tcol);
                } else {
                    push!(Tok::Ident(word), tline, tcol);
                }
            }
            other => {
                return Err(RtlParseError {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    push!(Tok::Eof, line, col);
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, RtlParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn here(&self) -> (u32, u32) {
        (self.tokens[self.pos].line, self.tokens[self.pos].col)
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (line, col) = self.here();
        Err(RtlParseError {
            line,
            col,
            message: message.into(),
        })
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.error(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn regex_pattern(&mut self) -> PResult<Pattern> {
        let (line, col) = self.here();
        match self.bump() {
            Tok::Regex(body) => Pattern::new(&body).map_err(|e| RtlParseError {
                line,
                col,
                message: format!("invalid pattern: {e}"),
            }),
            other => {
                self.pos -= 1;
                let _ = other;
                self.error("expected /pattern/")
            }
        }
    }

    fn check(&mut self) -> PResult<RtlCheck> {
        let mut clauses = vec![self.clause()?];
        while self.eat(&Tok::Semicolon) {
            if *self.peek() == Tok::Eof {
                break;
            }
            clauses.push(self.clause()?);
        }
        self.expect(Tok::Eof)?;
        Ok(RtlCheck { clauses })
    }

    fn clause(&mut self) -> PResult<RtlClause> {
        let label = match self.peek().clone() {
            Tok::Ident(name) => match CompletionCategory::parse_label(&name) {
                Some(label) => {
                    self.bump();
                    label
                }
                None => return self.error(format!("unknown clause label '{name}'")),
            },
            other => return self.error(format!("expected clause label, found {other}")),
        };
        self.expect(Tok::Colon)?;
        let mut disjuncts = vec![self.formula()?];
        while self.eat(&Tok::Pipe) {
            disjuncts.push(self.formula()?);
        }
        Ok(RtlClause {
            label,
            disjuncts,
            open_world: false,
        })
    }

    fn formula(&mut self) -> PResult<RtlFormula> {
        let mut left = self.and_expr()?;
        while self.eat(&Tok::OrOr) {
            let right = self.and_expr()?;
            left = RtlFormula::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> PResult<RtlFormula> {
        let mut left = self.until_expr()?;
        while self.eat(&Tok::Amp) {
            let right = self.until_expr()?;
            left = RtlFormula::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn until_expr(&mut self) -> PResult<RtlFormula> {
        let left = self.unary()?;
        if self.eat(&Tok::Temporal('U')) {
            let right = self.until_expr()?;
            return Ok(RtlFormula::Until(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<RtlFormula> {
        match self.peek() {
            Tok::Temporal('F') => {
                self.bump();
                Ok(RtlFormula::Eventually(Box::new(self.unary()?)))
            }
            Tok::Temporal('G') => {
                self.bump();
                Ok(RtlFormula::Always(Box::new(self.unary()?)))
            }
            Tok::Temporal('N') => {
                self.bump();
                Ok(RtlFormula::Next(Box::new(self.unary()?)))
            }
            Tok::Bang => {
                self.bump();
                Ok(RtlFormula::Not(Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> PResult<RtlFormula> {
        if self.eat(&Tok::LParen) {
            let inner = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok(inner);
        }
        let name = match self.peek().clone() {
            Tok::Ident(name) => name,
            other => return self.error(format!("expected formula, found {other}")),
        };
        match name.as_str() {
            "first" => {
                self.bump();
                return Ok(RtlFormula::Atom(AtomPredicate {
                    first: true,
                    ..AtomPredicate::any()
                }));
            }
            "last" => {
                self.bump();
                return Ok(RtlFormula::Atom(AtomPredicate {
                    last: true,
                    ..AtomPredicate::any()
                }));
            }
            _ => {}
        }
        self.bump();
        self.expect(Tok::LParen)?;
        let formula = match name.as_str() {
            "seq" => {
                let mut items = vec![self.formula()?];
                while self.eat(&Tok::Comma) {
                    items.push(self.formula()?);
                }
                if items.len() < 2 {
                    return self.error("seq requires at least two stages");
                }
                RtlFormula::Seq(items)
            }
            "never" => RtlFormula::Never(Box::new(self.formula()?)),
            "at_start" => RtlFormula::AtStart(Box::new(self.formula()?)),
            "at_end" => RtlFormula::AtEnd(Box::new(self.formula()?)),
            "implies_then" => {
                let cond = self.formula()?;
                self.expect(Tok::Comma)?;
                let then = self.formula()?;
                RtlFormula::ImpliesThen(Box::new(cond), Box::new(then))
            }
            "visit_all" => RtlFormula::VisitAll(self.regex_pattern()?),
            "loc" => RtlFormula::Atom(AtomPredicate::at_location(self.regex_pattern()?)),
            _ => match SkillKind::parse_fn_name(&name) {
                Some(skill) => self.skill_atom(skill)?,
                None => return self.error(format!("unknown skill or operator '{name}'")),
            },
        };
        self.expect(Tok::RParen)?;
        Ok(formula)
    }

    fn skill_atom(&mut self, skill: SkillKind) -> PResult<RtlFormula> {
        let mut atom = AtomPredicate::for_skill(skill);
        let mut bare_position = 0usize;
        loop {
            match self.peek().clone() {
                Tok::Regex(_) => {
                    let pattern = self.regex_pattern()?;
                    self.put_arg(&mut atom, bare_position, pattern)?;
                    bare_position += 1;
                }
                Tok::Ident(field) => {
                    self.bump();
                    if field == "first" && *self.peek() != Tok::Tilde {
                        atom.first = true;
                    } else if field == "last" && *self.peek() != Tok::Tilde {
                        atom.last = true;
                    } else {
                        self.expect(Tok::Tilde)?;
                        let pattern = self.regex_pattern()?;
                        self.put_field(&mut atom, skill, &field, pattern)?;
                    }
                }
                other => return self.error(format!("expected field pattern, found {other}")),
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(RtlFormula::Atom(atom))
    }

    fn put_arg(&mut self, atom: &mut AtomPredicate, position: usize, pattern: Pattern) -> PResult<()> {
        if atom.args.iter().any(|(p, _)| *p == position) {
            return self.error(format!("duplicate pattern for argument {position}"));
        }
        atom.args.push((position, pattern));
        Ok(())
    }

    fn put_field(
        &mut self,
        atom: &mut AtomPredicate,
        skill: SkillKind,
        field: &str,
        pattern: Pattern,
    ) -> PResult<()> {
        if let Some(rest) = field.strip_prefix('a') {
            if let Ok(position) = rest.parse::<usize>() {
                if position > 9 {
                    return self.error(format!("argument position {position} out of range"));
                }
                return self.put_arg(atom, position, pattern);
            }
        }
        match field {
            "res" => {
                if atom.result.replace(pattern).is_some() {
                    return self.error("duplicate result pattern");
                }
            }
            "loc" => {
                if atom.location.replace(pattern).is_some() {
                    return self.error("duplicate location pattern");
                }
            }
            alias => {
                let position = match (skill, alias) {
                    (SkillKind::Say, "msg") => 0,
                    (SkillKind::Ask, "person") => 0,
                    (SkillKind::Ask, "q") => 1,
                    (SkillKind::Ask, "opts") => 2,
                    (SkillKind::GoTo, "dest") => 0,
                    (SkillKind::IsInRoom | SkillKind::Pick | SkillKind::Place, "obj") => 0,
                    _ => {
                        return self.error(format!(
                            "field '{alias}' is not valid for skill '{}'",
                            skill.fn_name()
                        ))
                    }
                };
                return self.put_arg(atom, position, pattern);
            }
        }
        Ok(())
    }
}

/// Parses a full check: labeled clauses in conjunctive normal form.
pub fn parse_rtl(text: &str) -> Result<RtlCheck, RtlParseError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    parser.check()
}

/// Parses a single formula (no clause labels); used by tests and tools.
pub fn parse_formula(text: &str) -> Result<RtlFormula, RtlParseError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let formula = parser.formula()?;
    parser.expect(Tok::Eof)?;
    Ok(formula)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rtl::SkillSelector;

    #[test]
    fn eventually_atom_parses() {
        let f = parse_formula("F say(msg~/lobby/, loc~/office/)").unwrap();
        match f {
            RtlFormula::Eventually(inner) => match *inner {
                RtlFormula::Atom(atom) => {
                    assert_eq!(atom.skill, SkillSelector::Skill(SkillKind::Say));
                    assert_eq!(atom.args.len(), 1);
                    assert_eq!(atom.args[0].0, 0);
                    assert!(atom.location.is_some());
                }
                other => panic!("unexpected: {other:?}"),
            },
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn seq_parses_as_derived_node() {
        let f = parse_formula("seq(go_to(/office/), ask(q~/lunch/), say(/lobby/))").unwrap();
        match f {
            RtlFormula::Seq(items) => assert_eq!(items.len(), 3),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn dangling_paren_reports_column_5() {
        let e = parse_formula("F F(").unwrap_err();
        assert_eq!(e.line, 1);
        assert_eq!(e.col, 5);
    }

    #[test]
    fn zero_clause_check_is_rejected() {
        assert!(parse_rtl("").is_err());
        assert!(parse_rtl("   \n").is_err());
    }

    #[test]
    fn unknown_label_is_rejected() {
        let e = parse_rtl("Sparkle: F say(/hi/)").unwrap_err();
        assert!(e.message.contains("unknown clause label"));
    }

    #[test]
    fn clause_disjunction_uses_single_pipe() {
        let check = parse_rtl("SayAtLocation: F say(/a/) | F say(/b/)").unwrap();
        assert_eq!(check.clauses.len(), 1);
        assert_eq!(check.clauses[0].disjuncts.len(), 2);
    }

    #[test]
    fn multi_clause_check_parses() {
        let check = parse_rtl(
            "InitialTerminal: at_start(loc(/lobby/)) & at_end(loc(/lobby/));\n\
             SayAtLocation: F say(msg~/.*done.*/, loc~/lobby/)\n",
        )
        .unwrap();
        assert_eq!(check.clauses.len(), 2);
        assert_eq!(
            check.clauses[0].label,
            CompletionCategory::InitialTerminal
        );
    }

    #[test]
    fn operator_precedence_binds_and_tighter_than_or() {
        let f = parse_formula("F say(/a/) & F say(/b/) || F say(/c/)").unwrap();
        assert!(matches!(f, RtlFormula::Or(..)));
    }

    #[test]
    fn until_is_right_associative() {
        let f = parse_formula("say(/a/) U say(/b/) U say(/c/)").unwrap();
        match f {
            RtlFormula::Until(_, right) => assert!(matches!(*right, RtlFormula::Until(..))),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn escaped_slash_in_regex() {
        let f = parse_formula("F say(/either\\/or/)").unwrap();
        match f {
            RtlFormula::Eventually(inner) => match *inner {
                RtlFormula::Atom(atom) => {
                    assert_eq!(atom.args[0].1.as_str(), "either/or");
                }
                other => panic!("unexpected: {other:?}"),
            },
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn field_alias_must_match_skill() {
        let e = parse_formula("say(q~/x/)").unwrap_err();
        assert!(e.message.contains("not valid for skill"));
    }

    #[test]
    fn bad_pattern_is_reported() {
        let e = parse_formula("F say(/((/)").unwrap_err();
        assert!(e.message.contains("invalid pattern"));
    }

    #[test]
    fn seq_requires_two_stages() {
        let e = parse_formula("seq(say(/a/))").unwrap_err();
        assert!(e.message.contains("at least two"));
    }

    #[test]
    fn comments_are_ignored() {
        let check = parse_rtl("# the say clause\nSayAtLocation: F say(/hi/)").unwrap();
        assert_eq!(check.clauses.len(), 1);
    }

    #[test]
    fn first_last_inside_atoms_and_standalone() {
        parse_formula("say(/hi/, last)").unwrap();
        parse_formula("F (say(/hi/) & last)").unwrap();
        parse_formula("at_start(first)").unwrap();
    }

    #[test]
    fn generic_positional_fields() {
        let f = parse_formula("ask(a2~/.*bread.*/)").unwrap();
        match f {
            RtlFormula::Atom(atom) => assert_eq!(atom.args[0].0, 2),
            other => panic!("unexpected: {other:?}"),
        }
    }
}
