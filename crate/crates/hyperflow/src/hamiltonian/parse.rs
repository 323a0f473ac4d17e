//! Recursive-descent parser for polynomial scenario expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' uint)?
//! base   := variable | number | '(' expr ')'
//! variable := 'x' uint | 'r' uint
//! number := uint ('.' digits)? | uint '/' uint   (the latter through '/')
//! ```
//!
//! Parsing runs in two passes: syntax first, then name resolution and
//! folding into a polynomial. A divisor must fold to a nonzero constant.

use std::fmt;

use num::{BigInt, One, Zero};
use thiserror::Error;

use super::poly::{Polynomial, Rational};

/// Largest accepted exponent.
const MAX_EXPONENT: u32 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownVariable(String),
    BadExponent(String),
    NonConstantDivisor,
    DivisionByZero,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the source text.
    pub offset: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error at offset {}: {msg}", self.offset),
            ParseErrorKind::UnknownVariable(name) => {
                write!(f, "unknown variable `{name}` at offset {}", self.offset)
            }
            ParseErrorKind::BadExponent(msg) => write!(
                f,
                "exponent at offset {} is not a nonnegative integer: {msg}",
                self.offset
            ),
            ParseErrorKind::NonConstantDivisor => {
                write!(f, "divisor at offset {} is not a constant", self.offset)
            }
            ParseErrorKind::DivisionByZero => write!(f, "division by zero at offset {}", self.offset),
        }
    }
}

fn syntax(offset: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        kind: ParseErrorKind::Syntax(msg.into()),
        offset,
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(s) | Token::Ident(s) => format!("`{s}`"),
            Token::Plus => "'+'".into(),
            Token::Minus => "'-'".into(),
            Token::Star => "'*'".into(),
            Token::Slash => "'/'".into(),
            Token::Caret => "'^'".into(),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        let tok = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                out.push((Token::Number(text[start..i].to_string()), start));
                continue;
            }
            b if b.is_ascii_alphabetic() || b == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Token::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap();
                return Err(syntax(start, format!("unexpected character {ch:?}")));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Node {
    Number(Rational),
    Variable(String, usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>, usize),
    Pow(Box<Node>, u32),
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<(Token, usize)> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) | Some(Token::Minus) => {
                    let (op, at) = self.bump().unwrap();
                    let rhs = self.operand_after(&op, at, Self::term)?;
                    lhs = match op {
                        Token::Plus => Node::Add(Box::new(lhs), Box::new(rhs)),
                        _ => Node::Sub(Box::new(lhs), Box::new(rhs)),
                    };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) | Some(Token::Slash) => {
                    let (op, at) = self.bump().unwrap();
                    let rhs = self.operand_after(&op, at, Self::factor)?;
                    lhs = match op {
                        Token::Star => Node::Mul(Box::new(lhs), Box::new(rhs)),
                        _ => Node::Div(Box::new(lhs), Box::new(rhs), at),
                    };
                }
                _ => return Ok(lhs),
            }
        }
    }

    /// A binary operator with nothing after it is reported at the operator.
    fn operand_after(
        &mut self,
        op: &Token,
        at: usize,
        next: fn(&mut Self) -> Result<Node, ParseError>,
    ) -> Result<Node, ParseError> {
        if self.peek().is_none() {
            return Err(syntax(
                at,
                format!("operator {} is missing its right operand", op.describe()),
            ));
        }
        next(self)
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        if let Some(Token::Minus) = self.peek() {
            let (op, at) = self.bump().unwrap();
            let inner = self.operand_after(&op, at, Self::factor)?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        let base = self.base()?;
        if let Some(Token::Caret) = self.peek() {
            let (_, at) = self.bump().unwrap();
            return match self.bump() {
                Some((Token::Number(s), o)) => {
                    let e: u32 = s.parse().map_err(|_| ParseError {
                        kind: ParseErrorKind::BadExponent(format!("`{s}`")),
                        offset: o,
                    })?;
                    if e > MAX_EXPONENT {
                        return Err(ParseError {
                            kind: ParseErrorKind::BadExponent(format!(
                                "{e} exceeds the maximum of {MAX_EXPONENT}"
                            )),
                            offset: o,
                        });
                    }
                    Ok(Node::Pow(Box::new(base), e))
                }
                Some((tok, o)) => Err(ParseError {
                    kind: ParseErrorKind::BadExponent(tok.describe()),
                    offset: o,
                }),
                None => Err(syntax(at, "'^' is missing its exponent")),
            };
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Node, ParseError> {
        let at = self.offset();
        match self.bump() {
            Some((Token::Number(s), o)) => Ok(Node::Number(parse_number(&s, o)?)),
            Some((Token::Ident(name), o)) => Ok(Node::Variable(name, o)),
            Some((Token::LParen, o)) => {
                if self.peek().is_none() {
                    return Err(syntax(o, "unclosed '('"));
                }
                let inner = self.expr()?;
                match self.bump() {
                    Some((Token::RParen, _)) => Ok(inner),
                    Some((tok, p)) => Err(syntax(p, format!("expected ')', found {}", tok.describe()))),
                    None => Err(syntax(o, "unclosed '('")),
                }
            }
            Some((tok, o)) => Err(syntax(o, format!("unexpected {}", tok.describe()))),
            None => Err(syntax(at, "unexpected end of input")),
        }
    }
}

fn parse_number(s: &str, offset: usize) -> Result<Rational, ParseError> {
    let bad = || syntax(offset, format!("malformed number `{s}`"));
    let (int_part, frac_part) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    if frac_part.contains('.') || (int_part.is_empty() && frac_part.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let denom = num::pow(BigInt::from(10), frac_part.len());
    Ok(Rational::new(numer, denom))
}

/// Where a variable name lands in the mixed variable list
/// `x1..x_dim, r1..r_blocks`.
fn resolve(name: &str, dim: usize) -> Option<usize> {
    let blocks = dim / 4;
    let (head, digits) = name.split_at(1);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    let idx: usize = digits.parse().ok()?;
    match head {
        "x" if (1..=dim).contains(&idx) => Some(idx - 1),
        "r" if (1..=blocks).contains(&idx) => Some(dim + idx - 1),
        _ => None,
    }
}

fn fold(node: &Node, dim: usize) -> Result<Polynomial, ParseError> {
    let nvars = dim + dim / 4;
    Ok(match node {
        Node::Number(q) => Polynomial::constant(nvars, q.clone()),
        Node::Variable(name, at) => {
            let idx = resolve(name, dim).ok_or_else(|| ParseError {
                kind: ParseErrorKind::UnknownVariable(name.clone()),
                offset: *at,
            })?;
            Polynomial::variable(nvars, idx)
        }
        Node::Neg(a) => fold(a, dim)?.neg(),
        Node::Add(a, b) => fold(a, dim)?.add(&fold(b, dim)?),
        Node::Sub(a, b) => fold(a, dim)?.sub(&fold(b, dim)?),
        Node::Mul(a, b) => fold(a, dim)?.mul(&fold(b, dim)?),
        Node::Div(a, b, at) => {
            let num = fold(a, dim)?;
            let den = fold(b, dim)?;
            let k = den.constant_value().ok_or(ParseError {
                kind: ParseErrorKind::NonConstantDivisor,
                offset: *at,
            })?;
            if k.is_zero() {
                return Err(ParseError {
                    kind: ParseErrorKind::DivisionByZero,
                    offset: *at,
                });
            }
            num.scale(&(Rational::one() / k))
        }
        Node::Pow(a, e) => fold(a, dim)?.pow(*e),
    })
}

/// Parses `text` into a polynomial over `x1..x_dim, r1..r_{dim/4}`.
pub fn parse_polynomial(text: &str, dim: usize) -> Result<Polynomial, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let ast = parser.expr()?;
    if let Some((tok, at)) = parser.bump() {
        return Err(syntax(at, format!("unexpected {}", tok.describe())));
    }
    fold(&ast, dim)
}
