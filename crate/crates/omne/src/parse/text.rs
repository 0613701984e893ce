//! Text format: one statement per line group, `%` comments.
//!
//! ```text
//! a | b.                 disjunctive rule
//! q1 :- a, not c.        normal rule
//! :- a, b.               integrity constraint
//! 1 { a, not b }.        choice rule with lower bound
//! #query a, b.           candidate atoms (directives union; default: all)
//! ```
//!
//! Atom names are `[a-z][A-Za-z0-9_]*`; grounder-style names containing
//! `(`, `)` or `,` are written as quoted strings. Names starting with `_`
//! are reserved for internal use and rejected.

use super::ParseError;
use crate::program::{is_reserved_name, AtomId, ChoiceRule, DisjunctiveRule, Literal, Program};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Int(u64),
    Dot,
    Comma,
    Pipe,
    ColonDash,
    LBrace,
    RBrace,
    Minus,
    Directive(String),
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'%') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, u32, u32), ParseError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let Some(c) = self.peek() else {
            return Ok((Tok::Eof, line, col));
        };
        let tok = match c {
            b'.' => {
                self.bump();
                Tok::Dot
            }
            b',' => {
                self.bump();
                Tok::Comma
            }
            b'|' => {
                self.bump();
                Tok::Pipe
            }
            b'{' => {
                self.bump();
                Tok::LBrace
            }
            b'}' => {
                self.bump();
                Tok::RBrace
            }
            b'-' => {
                self.bump();
                Tok::Minus
            }
            b':' => {
                self.bump();
                if self.peek() == Some(b'-') {
                    self.bump();
                    Tok::ColonDash
                } else {
                    return Err(ParseError::new(line, col, "expected ':-'"));
                }
            }
            b'#' => {
                self.bump();
                let word = self.take_word();
                if word.is_empty() {
                    return Err(ParseError::new(
                        line,
                        col,
                        "expected directive name after '#'",
                    ));
                }
                Tok::Directive(word)
            }
            b'"' => {
                self.bump();
                let mut name = String::new();
                loop {
                    match self.bump() {
                        Some(b'"') => break,
                        Some(b'\n') | None => {
                            return Err(ParseError::new(
                                line,
                                col,
                                "unterminated quoted atom name",
                            ));
                        }
                        Some(c) => name.push(c as char),
                    }
                }
                if name.is_empty() {
                    return Err(ParseError::new(line, col, "empty quoted atom name"));
                }
                Tok::Quoted(name)
            }
            b'0'..=b'9' => {
                let word = self.take_word();
                match word.parse::<u64>() {
                    Ok(n) => Tok::Int(n),
                    Err(_) => {
                        return Err(ParseError::new(
                            line,
                            col,
                            format!("malformed integer '{word}'"),
                        ))
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => Tok::Ident(self.take_word()),
            c => {
                return Err(ParseError::new(
                    line,
                    col,
                    format!("unexpected character '{}'", c as char),
                ));
            }
        };
        Ok((tok, line, col))
    }

    fn take_word(&mut self) -> String {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.bump();
            } else {
                break;
            }
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    line: u32,
    col: u32,
    program: Program,
    saw_query_directive: bool,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let (tok, line, col) = lexer.next()?;
        Ok(Parser {
            lexer,
            tok,
            line,
            col,
            program: Program::new(),
            saw_query_directive: false,
        })
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        let (tok, line, col) = self.lexer.next()?;
        self.tok = tok;
        self.line = line;
        self.col = col;
        Ok(())
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col, msg)
    }

    fn expect_dot(&mut self) -> Result<(), ParseError> {
        match self.tok {
            Tok::Dot => self.advance(),
            Tok::Eof => Err(self.err("expected '.' before end of input")),
            _ => Err(self.err(format!("expected '.', found {}", describe(&self.tok)))),
        }
    }

    fn atom(&mut self) -> Result<AtomId, ParseError> {
        let name = match &self.tok {
            Tok::Ident(w) => {
                if w == "not" {
                    return Err(self.err("unexpected 'not'"));
                }
                if w.starts_with(|c: char| c.is_ascii_uppercase()) {
                    return Err(self.err(format!(
                        "unexpected identifier '{w}': atom names start with a lowercase letter (programs are ground)"
                    )));
                }
                w.clone()
            }
            Tok::Quoted(w) => w.clone(),
            other => return Err(self.err(format!("expected atom name, found {}", describe(other)))),
        };
        if is_reserved_name(&name) {
            return Err(self.err(format!("atom name '{name}' is reserved for internal use")));
        }
        self.advance()?;
        Ok(self.program.atoms.intern(&name))
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        if matches!(&self.tok, Tok::Ident(w) if w == "not") {
            self.advance()?;
            let atom = self.atom().map_err(|e| {
                if e.msg.starts_with("unexpected 'not'") {
                    ParseError::new(e.line, e.col, "nested 'not' is not supported")
                } else {
                    e
                }
            })?;
            Ok(Literal::negative(atom))
        } else {
            Ok(Literal::positive(self.atom()?))
        }
    }

    fn body_into(&mut self, body: &mut BTreeSet<Literal>) -> Result<(), ParseError> {
        loop {
            body.insert(self.literal()?);
            if self.tok == Tok::Comma {
                self.advance()?;
            } else {
                return Ok(());
            }
        }
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        match self.tok.clone() {
            Tok::Directive(name) => {
                if name != "query" {
                    return Err(self.err(format!("unknown directive '#{name}'")));
                }
                self.advance()?;
                self.saw_query_directive = true;
                if self.tok != Tok::Dot {
                    loop {
                        let a = self.atom()?;
                        self.program.query.insert(a);
                        if self.tok == Tok::Comma {
                            self.advance()?;
                        } else {
                            break;
                        }
                    }
                }
                self.expect_dot()
            }
            Tok::Int(bound) => {
                self.advance()?;
                self.choice_rule(bound)
            }
            // A bare brace block is a choice rule with no lower bound.
            Tok::LBrace => self.choice_rule(0),
            Tok::Minus => Err(self.err("negative bound: choice bounds are non-negative integers")),
            Tok::ColonDash => {
                self.advance()?;
                let mut body = BTreeSet::new();
                self.body_into(&mut body)?;
                self.expect_dot()?;
                self.program.disjunctive.push(DisjunctiveRule {
                    head: BTreeSet::new(),
                    body,
                });
                Ok(())
            }
            Tok::Ident(_) | Tok::Quoted(_) => self.disjunctive_rule(),
            other => Err(self.err(format!(
                "expected a rule or directive, found {}",
                describe(&other)
            ))),
        }
    }

    fn choice_rule(&mut self, bound: u64) -> Result<(), ParseError> {
        let bound = u32::try_from(bound).map_err(|_| self.err("choice bound out of range"))?;
        if self.tok != Tok::LBrace {
            return Err(self.err(format!(
                "expected '{{' after choice bound, found {}",
                describe(&self.tok)
            )));
        }
        self.advance()?;
        let mut literals = BTreeSet::new();
        if self.tok != Tok::RBrace {
            loop {
                literals.insert(self.literal()?);
                if self.tok == Tok::Comma {
                    self.advance()?;
                } else {
                    break;
                }
            }
        }
        if self.tok != Tok::RBrace {
            return Err(self.err(format!("expected '}}', found {}", describe(&self.tok))));
        }
        self.advance()?;
        self.expect_dot()?;
        self.program.choice.push(ChoiceRule { literals, bound });
        Ok(())
    }

    fn disjunctive_rule(&mut self) -> Result<(), ParseError> {
        let mut head = BTreeSet::new();
        head.insert(self.atom()?);
        while self.tok == Tok::Pipe {
            self.advance()?;
            head.insert(self.atom()?);
        }
        let mut body = BTreeSet::new();
        if self.tok == Tok::ColonDash {
            self.advance()?;
            self.body_into(&mut body)?;
        }
        self.expect_dot()?;
        self.program
            .disjunctive
            .push(DisjunctiveRule { head, body });
        Ok(())
    }

    fn finish(mut self) -> Result<Program, ParseError> {
        while self.tok != Tok::Eof {
            self.statement()?;
        }
        // No #query directive: every atom is a candidate.
        if !self.saw_query_directive {
            self.program.query = self.program.atoms.atoms().collect();
        }
        Ok(self.program)
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(w) => format!("'{w}'"),
        Tok::Quoted(w) => format!("\"{w}\""),
        Tok::Int(n) => format!("'{n}'"),
        Tok::Dot => "'.'".into(),
        Tok::Comma => "','".into(),
        Tok::Pipe => "'|'".into(),
        Tok::ColonDash => "':-'".into(),
        Tok::LBrace => "'{'".into(),
        Tok::RBrace => "'}'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Directive(d) => format!("'#{d}'"),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses the text format into a [`Program`].
pub fn parse_text(src: &str) -> Result<Program, ParseError> {
    Parser::new(src)?.finish()
}
