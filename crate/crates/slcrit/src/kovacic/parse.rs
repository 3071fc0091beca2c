//! Recursive-descent parser for rational-function expressions in `z`.
//!
//! Grammar (usual precedence, `^` binds tightest and right-associates):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := atom ('^' exponent)?
//! exponent := ['-'] integer | '(' ['-'] integer ')'
//! atom     := integer | 'z' | '(' expr ')'
//! ```
//!
//! All arithmetic is exact; `1/3` is the rational one-third, and the result
//! is the canonical reduced form, so printing and reparsing is the identity.

use super::poly::RatPoly;
use super::ratfn::{RatFn, RatFnError};
use crate::exact::ExactRatio;
use num_bigint::BigInt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("arithmetic error at byte {pos}: {source}")]
    Arithmetic { pos: usize, source: RatFnError },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Z,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut lx = Lexer { src: src.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        loop {
            while lx.pos < lx.src.len() && lx.src[lx.pos].is_ascii_whitespace() {
                lx.pos += 1;
            }
            if lx.pos >= lx.src.len() {
                return Ok(out);
            }
            let start = lx.pos;
            let tok = match lx.src[lx.pos] {
                b'+' => Tok::Plus,
                b'-' => Tok::Minus,
                b'*' => Tok::Star,
                b'/' => Tok::Slash,
                b'^' => Tok::Caret,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'z' => Tok::Z,
                c if c.is_ascii_digit() => {
                    let mut end = lx.pos;
                    while end < lx.src.len() && lx.src[end].is_ascii_digit() {
                        end += 1;
                    }
                    let text = std::str::from_utf8(&lx.src[lx.pos..end]).unwrap();
                    let n = BigInt::from_str(text).unwrap();
                    lx.pos = end;
                    out.push((start, Tok::Int(n)));
                    continue;
                }
                c => {
                    return Err(ParseError::Syntax {
                        pos: start,
                        msg: format!("unexpected character `{}`", c as char),
                    })
                }
            };
            lx.pos += 1;
            out.push((start, tok));
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn err(&self, msg: &str) -> ParseError {
        ParseError::Syntax { pos: self.pos(), msg: msg.into() }
    }

    fn arith(&self, pos: usize, source: RatFnError) -> ParseError {
        ParseError::Arithmetic { pos, source }
    }

    fn expr(&mut self) -> Result<RatFn, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatFn, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.at += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.at += 1;
                    let pos = self.pos();
                    let rhs = self.unary()?;
                    acc = acc
                        .checked_div(&rhs)
                        .map_err(|e| self.arith(pos, e))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RatFn, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.at += 1;
            Ok(-&self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<RatFn, ParseError> {
        let base_pos = self.pos();
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.at += 1;
        let exp = self.exponent()?;
        base.powi(exp).map_err(|e| self.arith(base_pos, e))
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let parenthesized = self.peek() == Some(&Tok::LParen);
        if parenthesized {
            self.at += 1;
        }
        let negative = self.peek() == Some(&Tok::Minus);
        if negative {
            self.at += 1;
        }
        let n = match self.bump() {
            Some(Tok::Int(n)) => n,
            _ => return Err(self.err("expected an integer exponent after `^`")),
        };
        if parenthesized {
            self.expect(Tok::RParen, "expected `)` closing the exponent")?;
        }
        let n: i32 = n
            .try_into()
            .map_err(|_| self.err("exponent out of range"))?;
        Ok(if negative { -n } else { n })
    }

    fn atom(&mut self) -> Result<RatFn, ParseError> {
        match self.peek() {
            Some(Tok::Int(_)) => {
                let Some(Tok::Int(n)) = self.bump() else { unreachable!() };
                Ok(RatFn::constant(ExactRatio::from_integer(n)))
            }
            Some(Tok::Z) => {
                self.at += 1;
                Ok(RatFn::from_poly(RatPoly::x()))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "expected `)`")?;
                Ok(inner)
            }
            _ => Err(self.err("expected a number, `z`, or `(`")),
        }
    }
}

/// Parses an expression into canonical reduced form.
pub fn parse(src: &str) -> Result<RatFn, ParseError> {
    let toks = Lexer::tokens(src)?;
    let mut parser = Parser { toks, at: 0, end: src.len() };
    let value = parser.expr()?;
    if parser.at != parser.toks.len() {
        return Err(parser.err("unexpected trailing input"));
    }
    Ok(value)
}
