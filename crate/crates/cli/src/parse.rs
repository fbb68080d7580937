//! Expression syntax.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! exponent:= '-'? number | '(' '-'? number ('/' number)? ')'
//! atom    := number | 'x' | ('log' | 'exp') '(' expr ')' | '(' expr ')'
//! ```
//!
//! Numbers are decimal literals and are read as exact rationals.

use std::fmt;

use num::{BigInt, BigRational, One, Zero};

/// A half-open byte range in the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Const(BigRational),
    X,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, BigRational),
    Log(Box<Expr>),
    Exp(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

fn rational_text(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl Expr {
    /// Constructor-style rendering of the syntax tree, e.g. `Div(1, x)`.
    pub fn tree(&self) -> String {
        let bin = |name: &str, a: &Expr, b: &Expr| format!("{name}({}, {})", a.tree(), b.tree());
        match &self.kind {
            ExprKind::Const(r) => rational_text(r),
            ExprKind::X => "x".into(),
            ExprKind::Neg(a) => format!("Neg({})", a.tree()),
            ExprKind::Add(a, b) => bin("Add", a, b),
            ExprKind::Sub(a, b) => bin("Sub", a, b),
            ExprKind::Mul(a, b) => bin("Mul", a, b),
            ExprKind::Div(a, b) => bin("Div", a, b),
            ExprKind::Pow(a, r) => format!("Pow({},{})", a.tree(), rational_text(r)),
            ExprKind::Log(a) => format!("Log({})", a.tree()),
            ExprKind::Exp(a) => format!("Exp({})", a.tree()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at offset {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
}

fn lex(src: &str) -> Result<Lexer, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let text = &src[start..i];
            let value = decimal(text).ok_or(ParseError { offset: start, message: format!("malformed number {text}") })?;
            toks.push((Tok::Num(value), start, i));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            toks.push((Tok::Ident(src[start..i].to_string()), start, i));
        } else if "+-*/^()".contains(c) {
            toks.push((Tok::Sym(c), i, i + 1));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or(c);
            return Err(ParseError { offset: i, message: format!("unexpected character '{ch}'") });
        }
    }
    toks.push((Tok::End, src.len(), src.len()));
    Ok(Lexer { toks })
}

fn decimal(text: &str) -> Option<BigRational> {
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if frac.contains('.') {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let d = num::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(n, d))
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].2
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { offset: self.offset(), message: message.into() })
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected '{c}'"))
        }
    }

    fn node(&self, kind: ExprKind, start: usize) -> Expr {
        Expr { kind, span: Span { start, end: self.prev_end() } }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let start = self.offset();
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = self.node(ExprKind::Add(Box::new(acc), Box::new(rhs)), start);
                }
                Tok::Sym('-') => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = self.node(ExprKind::Sub(Box::new(acc), Box::new(rhs)), start);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let start = self.offset();
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = self.node(ExprKind::Mul(Box::new(acc), Box::new(rhs)), start);
                }
                Tok::Sym('/') => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = self.node(ExprKind::Div(Box::new(acc), Box::new(rhs)), start);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let start = self.offset();
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            let inner = self.unary()?;
            return Ok(self.node(ExprKind::Neg(Box::new(inner)), start));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let start = self.offset();
        let base = self.atom()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let r = self.exponent()?;
        Ok(self.node(ExprKind::Pow(Box::new(base), r), start))
    }

    fn signed_number(&mut self) -> Result<BigRational, ParseError> {
        let neg = if *self.peek() == Tok::Sym('-') {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => self.error("exponent must be a rational literal"),
        }
    }

    fn exponent(&mut self) -> Result<BigRational, ParseError> {
        if *self.peek() == Tok::Sym('(') {
            self.bump();
            let n = self.signed_number()?;
            let r = if *self.peek() == Tok::Sym('/') {
                self.bump();
                let d = match self.peek().clone() {
                    Tok::Num(d) if !d.is_zero() => d,
                    Tok::Num(_) => return self.error("zero denominator in exponent"),
                    _ => return self.error("exponent must be a rational literal"),
                };
                self.bump();
                n / d
            } else {
                n
            };
            self.expect(')')?;
            Ok(r)
        } else {
            self.signed_number()
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(self.node(ExprKind::Const(n), start))
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "x" => Ok(self.node(ExprKind::X, start)),
                    "log" | "exp" => {
                        self.expect('(')?;
                        let inner = self.expr()?;
                        self.expect(')')?;
                        let kind = if name == "log" {
                            ExprKind::Log(Box::new(inner))
                        } else {
                            ExprKind::Exp(Box::new(inner))
                        };
                        Ok(self.node(kind, start))
                    }
                    _ => Err(ParseError { offset: start, message: format!("unknown identifier '{name}'") }),
                }
            }
            Tok::Sym('(') => {
                self.bump();
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(Expr { kind: inner.kind, span: Span { start, end: self.prev_end() } })
            }
            Tok::End => self.error("unexpected end of input"),
            Tok::Sym(c) => self.error(format!("unexpected '{c}'")),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let lexer = lex(src)?;
    let mut p = Parser { toks: lexer.toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}

/// `1` as an expression, for building trees programmatically.
pub fn one() -> Expr {
    Expr { kind: ExprKind::Const(BigRational::one()), span: Span { start: 0, end: 0 } }
}
