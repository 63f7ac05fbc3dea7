//! Recursive-descent parser for the ASCII polynomial grammar:
//!
//! ```text
//! expr   := ('-'|'+')? term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' uint)?
//! base   := number | 'x' uint | '(' expr ')'
//! ```
//!
//! Numbers are decimal literals read as exact rationals. Division is only allowed by a
//! nonzero constant. Positions in errors are byte offsets into the input.

use num_rational::BigRational;
use num_traits::Zero;

use super::Polynomial;
use crate::error::{Error, Result};
use crate::numeric;

pub fn parse_polynomial(text: &str, n_vars: usize) -> Result<Polynomial> {
    if n_vars == 0 {
        return Err(Error::InvalidArgument("n_vars must be positive".into()));
    }
    let mut p = Parser { src: text.as_bytes(), pos: 0, n_vars };
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected character {:?}", p.src[p.pos] as char)));
    }
    Ok(poly)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n_vars: usize,
}

impl Parser<'_> {
    fn syntax(&self, msg: impl Into<String>) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let negate = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.add(&t)?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.sub(&t)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let f = self.factor()?;
                    acc = acc.mul(&f)?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let f = self.factor()?;
                    let divisor = constant_value(&f)
                        .filter(|c| !c.is_zero())
                        .ok_or(Error::Syntax { pos: at, msg: "divisor must be a nonzero constant".into() })?;
                    acc = acc.scale(&divisor.recip());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Polynomial> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let followed_by_bad = matches!(self.src.get(self.pos), Some(b'.') | Some(b'x') | Some(b'('));
            if self.pos == start || followed_by_bad {
                return Err(Error::BadExponent { pos: start });
            }
            let k: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| Error::BadExponent { pos: start })?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'x') => {
                let at = self.pos;
                self.pos += 1;
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if start == self.pos {
                    return Err(self.syntax("expected variable index after 'x'"));
                }
                let index: usize = std::str::from_utf8(&self.src[start..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|_| Error::Syntax { pos: at, msg: "variable index too large".into() })?;
                if index == 0 || index > self.n_vars {
                    return Err(Error::VariableOutOfRange { index, n_vars: self.n_vars });
                }
                Ok(Polynomial::var(self.n_vars, index - 1))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
                    self.pos += 1;
                }
                let lit = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let value = numeric::parse_rational(lit)
                    .map_err(|_| Error::Syntax { pos: start, msg: format!("malformed number {lit:?}") })?;
                Ok(Polynomial::constant(self.n_vars, value))
            }
            Some(c) => Err(self.syntax(format!("unexpected character {:?}", c as char))),
            None => Err(self.syntax("unexpected end of input")),
        }
    }
}

fn constant_value(p: &Polynomial) -> Option<BigRational> {
    if p.degree() == 0 {
        Some(p.coefficient(&super::MultiIndex::zero(p.n_vars())))
    } else {
        None
    }
}
