//! Recursive-descent parser for weight expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' signed-rational)?
//! base   := number | 'p' index | '(' expr ')' | ('exp' | 'log') '(' expr ')'
//! ```
//!
//! In dimension one `z` is accepted as an alias for `p1`.

use num_traits::Zero;

use super::expr::Expr;
use crate::error::{Error, Result};
use crate::rational::{parse_rational, Rational};

pub fn parse(text: &str, dim: usize) -> Result<Expr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, dim };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::add(lhs, self.term()?);
            } else if self.eat(b'-') {
                lhs = Expr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::mul(lhs, self.unary()?);
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                let rhs = self.unary()?;
                if matches!(&rhs, Expr::Const(c) if c.is_zero()) {
                    self.pos = at;
                    return Err(self.err("division by literal zero"));
                }
                lhs = Expr::div(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::neg(self.unary()?));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.eat(b'^') {
            let r = self.signed_rational()?;
            return Ok(Expr::pow(base, r));
        }
        Ok(base)
    }

    fn signed_rational(&mut self) -> Result<Rational> {
        let paren = self.eat(b'(');
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let mut r = self
            .number()?
            .ok_or_else(|| self.err("exponent must be a rational literal"))?;
        // a bare exponent ends at `/`, so `p1^2/10` is `(p1^2)/10`
        if paren && self.eat(b'/') {
            let d = self
                .number()?
                .ok_or_else(|| self.err("expected denominator in exponent"))?;
            if d.is_zero() {
                return Err(self.err("zero denominator in exponent"));
            }
            r /= d;
        }
        if paren {
            self.expect(b')')?;
        }
        Ok(if neg { -r } else { r })
    }

    fn number(&mut self) -> Result<Option<Rational>> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        parse_rational(text).map(Some).map_err(|_| Error::Syntax {
            pos: start,
            msg: format!("malformed number `{text}`"),
        })
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Const(self.number()?.unwrap())),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match ident {
                    "exp" | "log" => {
                        self.expect(b'(')?;
                        let arg = self.expr()?;
                        self.expect(b')')?;
                        Ok(if ident == "exp" { Expr::exp(arg) } else { Expr::log(arg) })
                    }
                    "z" if self.dim == 1 => Ok(Expr::Var(0)),
                    _ => self.variable(ident),
                }
            }
            Some(_) => Err(self.err("unexpected character")),
        }
    }

    fn variable(&self, ident: &str) -> Result<Expr> {
        let index = ident
            .strip_prefix('p')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&i| i >= 1)
            .ok_or_else(|| Error::UnknownVariable(ident.to_string()))?;
        if index > self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: index,
            });
        }
        Ok(Expr::Var(index - 1))
    }
}
