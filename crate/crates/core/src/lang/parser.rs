//! Recursive-descent parser for the concrete syntax.
//!
//! Precedence, loosest to tightest: `or`, `and`, relational, `+ -`,
//! `* mod`. All binary operators are left-associative; relational
//! operators do not chain. Parentheses are accepted anywhere; the printer
//! emits only the minimal set needed to reproduce the tree.

use std::fmt;

use thiserror::Error;

use super::ast::{BinOp, Expr, Program, Stmt, StmtKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(i64),
    KwSkip,
    KwIf,
    KwThen,
    KwElse,
    KwFi,
    KwWhile,
    KwDo,
    KwOd,
    KwTrue,
    KwFalse,
    KwAnd,
    KwOr,
    KwMod,
    Assign, // :=
    Semi,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Num(n) => write!(f, "number `{n}`"),
            Tok::KwSkip => write!(f, "`skip`"),
            Tok::KwIf => write!(f, "`if`"),
            Tok::KwThen => write!(f, "`then`"),
            Tok::KwElse => write!(f, "`else`"),
            Tok::KwFi => write!(f, "`fi`"),
            Tok::KwWhile => write!(f, "`while`"),
            Tok::KwDo => write!(f, "`do`"),
            Tok::KwOd => write!(f, "`od`"),
            Tok::KwTrue => write!(f, "`true`"),
            Tok::KwFalse => write!(f, "`false`"),
            Tok::KwAnd => write!(f, "`and`"),
            Tok::KwOr => write!(f, "`or`"),
            Tok::KwMod => write!(f, "`mod`"),
            Tok::Assign => write!(f, "`:=`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Le => write!(f, "`<=`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Ne => write!(f, "`!=`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::Ge => write!(f, "`>=`"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, msg: msg.into() }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, u32, u32)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
                self.bump();
            }
            // comments: `#` to end of line
            if self.peek() == Some(b'#') {
                while matches!(self.peek(), Some(c) if c != b'\n') {
                    self.bump();
                }
                continue;
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else { break };
            let tok = match c {
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                        self.bump();
                    }
                    let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    match word {
                        "skip" => Tok::KwSkip,
                        "if" => Tok::KwIf,
                        "then" => Tok::KwThen,
                        "else" => Tok::KwElse,
                        "fi" => Tok::KwFi,
                        "while" => Tok::KwWhile,
                        "do" => Tok::KwDo,
                        "od" => Tok::KwOd,
                        "true" => Tok::KwTrue,
                        "false" => Tok::KwFalse,
                        "and" => Tok::KwAnd,
                        "or" => Tok::KwOr,
                        "mod" => Tok::KwMod,
                        _ => Tok::Ident(word.to_string()),
                    }
                }
                b'0'..=b'9' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        self.bump();
                    }
                    let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let n = digits
                        .parse::<i64>()
                        .map_err(|_| self.err(format!("integer literal `{digits}` out of range")))?;
                    Tok::Num(n)
                }
                b':' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::Assign
                    } else {
                        return Err(self.err("expected `=` after `:`"));
                    }
                }
                b';' => {
                    self.bump();
                    Tok::Semi
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'+' => {
                    self.bump();
                    Tok::Plus
                }
                b'-' => {
                    self.bump();
                    Tok::Minus
                }
                b'*' => {
                    self.bump();
                    Tok::Star
                }
                b'<' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::Le
                    } else {
                        Tok::Lt
                    }
                }
                b'>' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::Ge
                    } else {
                        Tok::Gt
                    }
                }
                b'=' => {
                    self.bump();
                    Tok::Eq
                }
                b'!' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::Ne
                    } else {
                        return Err(self.err("expected `=` after `!`"));
                    }
                }
                other => {
                    return Err(self.err(format!("unexpected character `{}`", other as char)));
                }
            };
            out.push((tok, line, col));
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(Tok, u32, u32)>,
    idx: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _, _)| t)
    }

    fn pos(&self) -> (u32, u32) {
        self.toks
            .get(self.idx)
            .or_else(|| self.toks.last())
            .map(|&(_, l, c)| (l, c))
            .unwrap_or((1, 1))
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.pos();
        ParseError { line, col, msg: msg.into() }
    }

    fn next(&mut self) -> Result<Tok, ParseError> {
        let t = self
            .toks
            .get(self.idx)
            .map(|(t, _, _)| t.clone())
            .ok_or_else(|| self.err("unexpected end of input"))?;
        self.idx += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let got = self.next()?;
        if got == want {
            Ok(())
        } else {
            self.idx -= 1;
            Err(self.err(format!("expected {want}, found {got}")))
        }
    }

    fn at_end(&self) -> bool {
        self.idx == self.toks.len()
    }

    // stmt := simple (';' simple)*   folded to the right
    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let mut parts = vec![self.simple_stmt()?];
        while self.peek() == Some(&Tok::Semi) {
            self.next()?;
            parts.push(self.simple_stmt()?);
        }
        let mut stmt = parts.pop().unwrap();
        while let Some(prev) = parts.pop() {
            stmt = Stmt::new(StmtKind::Seq(Box::new(prev), Box::new(stmt)));
        }
        Ok(stmt)
    }

    fn simple_stmt(&mut self) -> Result<Stmt, ParseError> {
        match self.next()? {
            Tok::KwSkip => Ok(Stmt::new(StmtKind::Skip)),
            Tok::Ident(var) => {
                self.expect(Tok::Assign)?;
                let rhs = self.typed_expr(super::ast::Ty::Int)?;
                Ok(Stmt::new(StmtKind::Assign { var, rhs }))
            }
            Tok::KwIf => {
                let cond = self.typed_expr(super::ast::Ty::Bool)?;
                self.expect(Tok::KwThen)?;
                let then_branch = self.stmt()?;
                self.expect(Tok::KwElse)?;
                let else_branch = self.stmt()?;
                self.expect(Tok::KwFi)?;
                Ok(Stmt::new(StmtKind::If {
                    cond,
                    then_branch: Box::new(then_branch),
                    else_branch: Box::new(else_branch),
                }))
            }
            Tok::KwWhile => {
                let cond = self.typed_expr(super::ast::Ty::Bool)?;
                self.expect(Tok::KwDo)?;
                let body = self.stmt()?;
                self.expect(Tok::KwOd)?;
                Ok(Stmt::new(StmtKind::While { cond, body: Box::new(body) }))
            }
            other => {
                self.idx -= 1;
                Err(self.err(format!("expected statement, found {other}")))
            }
        }
    }

    fn typed_expr(&mut self, want: super::ast::Ty) -> Result<Expr, ParseError> {
        let (line, col) = self.pos();
        let e = self.expr()?;
        match e.ty() {
            Ok(t) if t == want => Ok(e),
            Ok(t) => Err(ParseError {
                line,
                col,
                msg: format!("expected {want} expression, found {t} expression `{e}`"),
            }),
            Err(terr) => Err(ParseError { line, col, msg: terr.to_string() }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.and_expr()?;
        while self.peek() == Some(&Tok::KwOr) {
            self.next()?;
            e = Expr::binary(BinOp::Or, e, self.and_expr()?);
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.rel_expr()?;
        while self.peek() == Some(&Tok::KwAnd) {
            self.next()?;
            e = Expr::binary(BinOp::And, e, self.rel_expr()?);
        }
        Ok(e)
    }

    fn rel_expr(&mut self) -> Result<Expr, ParseError> {
        let e = self.add_expr()?;
        let op = match self.peek() {
            Some(Tok::Lt) => BinOp::Lt,
            Some(Tok::Le) => BinOp::Le,
            Some(Tok::Eq) => BinOp::Eq,
            Some(Tok::Ne) => BinOp::Ne,
            Some(Tok::Gt) => BinOp::Gt,
            Some(Tok::Ge) => BinOp::Ge,
            _ => return Ok(e),
        };
        self.next()?;
        let rhs = self.add_expr()?;
        Ok(Expr::binary(op, e, rhs))
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(e),
            };
            self.next()?;
            e = Expr::binary(op, e, self.mul_expr()?);
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.atom()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::KwMod) => BinOp::Mod,
                _ => return Ok(e),
            };
            self.next()?;
            e = Expr::binary(op, e, self.atom()?);
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.next()? {
            Tok::Num(n) => Ok(Expr::Num(n)),
            Tok::KwTrue => Ok(Expr::Bool(true)),
            Tok::KwFalse => Ok(Expr::Bool(false)),
            Tok::Ident(name) => Ok(Expr::Var(name)),
            // negative literal; binary minus is handled one level up
            Tok::Minus => match self.next()? {
                Tok::Num(n) => Ok(Expr::Num(-n)),
                other => {
                    self.idx -= 1;
                    Err(self.err(format!("expected number after `-`, found {other}")))
                }
            },
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => {
                self.idx -= 1;
                Err(self.err(format!("expected expression, found {other}")))
            }
        }
    }
}

/// Parses a program and assigns pre-order statement ids.
///
/// Rejects malformed input and type errors (a boolean where an integer is
/// required, and vice versa).
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let toks = Lexer::new(text).tokenize()?;
    if toks.is_empty() {
        return Err(ParseError { line: 1, col: 1, msg: "empty program".into() });
    }
    let mut parser = Parser { toks, idx: 0 };
    let body = parser.stmt()?;
    if !parser.at_end() {
        return Err(parser.err(format!(
            "expected end of input, found {}",
            parser.peek().unwrap()
        )));
    }
    Ok(Program::new(body))
}

/// Parses a single expression (used by test assertions, bundle configs and
/// patch deserialization). The result is type-checked but may be of either
/// type; callers impose the type they need.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let toks = Lexer::new(text).tokenize()?;
    if toks.is_empty() {
        return Err(ParseError { line: 1, col: 1, msg: "empty expression".into() });
    }
    let mut parser = Parser { toks, idx: 0 };
    let e = parser.expr()?;
    if !parser.at_end() {
        return Err(parser.err(format!(
            "expected end of expression, found {}",
            parser.peek().unwrap()
        )));
    }
    e.ty().map_err(|terr| ParseError { line: 1, col: 1, msg: terr.to_string() })?;
    Ok(e)
}
