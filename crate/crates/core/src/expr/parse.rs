//! Recursive-descent parser.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := ('-' | '+') factor | base ('^' factor)?
//! base     := number | ident | ident '(' expr (',' expr)? ')' | '(' expr ')'
//! ```
//!
//! Unary minus binds looser than `^`, so `-x^2` is `-(x^2)`. The exponent
//! operator is right associative.

use thiserror::Error;

use super::{axis_of, Expr, Func};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { name: String, pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s = &text[start..i];
            let v: f64 =
                s.parse().map_err(|_| ParseError::Syntax { pos: start, msg: format!("malformed number `{s}`") })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(ParseError::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    names: Option<&'a [&'a str]>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, op: char) -> bool {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{op}`")))
        }
    }

    fn error(&self, msg: String) -> ParseError {
        ParseError::Syntax { pos: self.pos(), msg }
    }

    fn expr<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = Expr::add(acc, self.term()?);
            } else if self.eat('-') {
                acc = Expr::sub(acc, self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = Expr::mul(acc, self.factor()?);
            } else if self.eat('/') {
                acc = Expr::div(acc, self.factor()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        if self.eat('-') {
            return Ok(Expr::neg(self.factor()?));
        }
        if self.eat('+') {
            return self.factor();
        }
        let base = self.base()?;
        if self.eat('^') {
            let exponent = self.factor()?;
            return Ok(Expr::pow(base, exponent));
        }
        Ok(base)
    }

    fn resolve(&self, name: &str) -> Option<usize> {
        match self.names {
            Some(names) => names.iter().position(|n| *n == name),
            None => axis_of(name),
        }
    }

    fn base<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::constant(T::of(v))),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Op('(') {
                    self.bump();
                    return self.call(name, pos);
                }
                match name.as_str() {
                    "pi" => Ok(Expr::constant(T::PI())),
                    "e" => Ok(Expr::constant(T::E())),
                    _ => match self.resolve(&name) {
                        Some(axis) => Ok(Expr::var(axis)),
                        None => Err(ParseError::UnknownIdentifier { name, pos }),
                    },
                }
            }
            Tok::End => Err(ParseError::Syntax { pos, msg: "unexpected end of input".into() }),
            Tok::Op(c) => Err(ParseError::Syntax { pos, msg: format!("unexpected `{c}`") }),
        }
    }

    fn call<T: Scalar>(&mut self, name: String, pos: usize) -> Result<Expr<T>, ParseError> {
        let first = self.expr()?;
        let second = if self.eat(',') { Some(self.expr()?) } else { None };
        self.expect(')')?;
        if let Some(func) = Func::from_name(&name) {
            if second.is_some() {
                return Err(ParseError::Syntax { pos, msg: format!("`{name}` takes one argument") });
            }
            return Ok(Expr::func(func, first));
        }
        match name.as_str() {
            "mod" | "dmod" => {
                let modulus = second
                    .ok_or_else(|| ParseError::Syntax { pos, msg: format!("`{name}` takes two arguments") })?
                    .as_const()
                    .ok_or_else(|| ParseError::Syntax { pos, msg: "modulus must be a constant expression".into() })?;
                if modulus == T::zero() {
                    return Err(ParseError::Syntax { pos, msg: "modulus must be nonzero".into() });
                }
                Ok(if name == "mod" { Expr::modulo(first, modulus) } else { Expr::mod_step(first, modulus, T::one()) })
            }
            _ => Err(ParseError::UnknownIdentifier { name, pos }),
        }
    }
}

/// Parses an expression using the standard axis names (`x`, `y`, `z`, `x1`..).
pub fn parse<T: Scalar>(text: &str) -> Result<Expr<T>, ParseError> {
    run(text, None)
}

/// Parses an expression where `names[k]` denotes axis `k`.
pub fn parse_with_names<T: Scalar>(text: &str, names: &[&str]) -> Result<Expr<T>, ParseError> {
    run(text, Some(names))
}

fn run<T: Scalar>(text: &str, names: Option<&[&str]>) -> Result<Expr<T>, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0, names };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("trailing input".into()));
    }
    Ok(e)
}
