//! Parser for ring elements written the way the presentations are printed:
//! `2*y^2*z - 1/3`, `t/x`, `(1 + y*z)^2`. Multiplication may be implicit
//! (`2y`, `y z`), division requires the divisor to be a unit, and base
//! variables (`t`, or `t1..tr` for higher rank) denote their image monomials
//! unless shadowed by a chart variable of the same name.

use super::{ChartRing, PolyElement};
use crate::error::{Error, Result};
use crate::Q;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                chars.next();
            }
            '+' => {
                chars.next();
                out.push(Tok::Plus);
            }
            '-' => {
                chars.next();
                out.push(Tok::Minus);
            }
            '*' => {
                chars.next();
                out.push(Tok::Star);
            }
            '/' => {
                chars.next();
                out.push(Tok::Slash);
            }
            '^' => {
                chars.next();
                out.push(Tok::Caret);
            }
            '(' => {
                chars.next();
                out.push(Tok::LParen);
            }
            ')' => {
                chars.next();
                out.push(Tok::RParen);
            }
            '0'..='9' => {
                let mut n: i64 = 0;
                while let Some(&d) = chars.peek() {
                    if let Some(v) = d.to_digit(10) {
                        n = n
                            .checked_mul(10)
                            .and_then(|n| n.checked_add(v as i64))
                            .ok_or_else(|| Error::Parse("integer literal overflow".into()))?;
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Tok::Int(n));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        name.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Tok::Ident(name));
            }
            other => return Err(Error::Parse(format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    ring: &'a Arc<ChartRing>,
    toks: Vec<Tok>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<PolyElement> {
        let mut negate = false;
        if self.peek() == Some(&Tok::Minus) {
            self.next();
            negate = true;
        } else if self.peek() == Some(&Tok::Plus) {
            self.next();
        }
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    let t = self.term()?;
                    acc = acc.add(&t);
                }
                Some(Tok::Minus) => {
                    self.next();
                    let t = self.term()?;
                    acc = acc.sub(&t);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<PolyElement> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.next();
                    let f = self.factor()?;
                    acc = acc.mul(&f);
                }
                Some(Tok::Slash) => {
                    self.next();
                    let f = self.factor()?;
                    let inv = f.unit_inverse().map_err(|e| {
                        Error::Parse(format!("division by a non-unit: {e}"))
                    })?;
                    acc = acc.mul(&inv);
                }
                // juxtaposition is multiplication
                Some(Tok::Int(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    let f = self.factor()?;
                    acc = acc.mul(&f);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<PolyElement> {
        let base = match self.next() {
            Some(Tok::Int(n)) => self.ring.constant(Q::from_integer(n.into())),
            Some(Tok::Ident(name)) => self.resolve(&name)?,
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                if self.next() != Some(Tok::RParen) {
                    return Err(Error::Parse("missing ')'".into()));
                }
                inner
            }
            other => return Err(Error::Parse(format!("unexpected token {other:?}"))),
        };
        if self.peek() == Some(&Tok::Caret) {
            self.next();
            let mut neg = false;
            if self.peek() == Some(&Tok::Minus) {
                self.next();
                neg = true;
            }
            let Some(Tok::Int(n)) = self.next() else {
                return Err(Error::Parse("exponent must be an integer".into()));
            };
            let n = i32::try_from(n).map_err(|_| Error::Parse("exponent too large".into()))?;
            return if neg {
                let inv = base
                    .unit_inverse()
                    .map_err(|e| Error::Parse(format!("negative power of a non-unit: {e}")))?;
                Ok(inv.pow(n as u32))
            } else {
                Ok(base.pow(n as u32))
            };
        }
        Ok(base)
    }

    fn resolve(&self, name: &str) -> Result<PolyElement> {
        if let Ok(v) = self.ring.var(name) {
            return Ok(v);
        }
        if let Some(i) = self
            .ring
            .base
            .var_names()
            .iter()
            .position(|n| n == name)
        {
            return Ok(self.ring.base_image(i));
        }
        Err(Error::Parse(format!(
            "unknown variable '{name}' in ring {}",
            self.ring.name
        )))
    }
}

impl ChartRing {
    /// Parses an element of this ring from its display syntax.
    pub fn parse(self: &Arc<Self>, input: &str) -> Result<PolyElement> {
        let toks = lex(input)?;
        if toks.is_empty() {
            return Err(Error::Parse("empty input".into()));
        }
        let mut p = Parser {
            ring: self,
            toks,
            pos: 0,
        };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!(
                "trailing input at token {:?}",
                p.toks[p.pos]
            )));
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{ArtinBase, ChartRing};

    #[test]
    fn parse_roundtrip_display() {
        let r = ChartRing::new(
            "Vx",
            vec![("y", false), ("z", false)],
            ArtinBase::new(1, 2),
            vec![vec![(0, 1), (1, 1)]],
            vec![],
        )
        .unwrap();
        for s in ["0", "1", "-1/2", "y", "2*y^2*z - 1/3", "y - z + 1"] {
            let x = r.parse(s).unwrap();
            let back = r.parse(&x.to_string()).unwrap();
            assert_eq!(x, back, "roundtrip of {s}");
        }
        // base variable substitution: t means yz here
        assert_eq!(r.parse("t").unwrap(), r.parse("y*z").unwrap());
        assert_eq!(r.parse("t^3").unwrap(), r.zero());
        // implicit multiplication
        assert_eq!(r.parse("2y z").unwrap(), r.parse("2*y*z").unwrap());
        assert!(r.parse("w").is_err());
        assert!(r.parse("1/y").is_err());
        assert!(r.parse("y +").is_err());
    }

    #[test]
    fn parse_laurent() {
        let r = ChartRing::new(
            "E",
            vec![("x", true), ("t", false)],
            ArtinBase::new(1, 3),
            vec![vec![(1, 1)]],
            vec![],
        )
        .unwrap();
        assert_eq!(r.parse("t/x").unwrap(), r.parse("t*x^-1").unwrap());
        assert_eq!(r.parse("1/x").unwrap(), r.parse("x^-1").unwrap());
        assert_eq!(
            r.parse("(1+t)^2").unwrap(),
            r.parse("1 + 2t + t^2").unwrap()
        );
        // dividing by a unit series works too
        let q = r.parse("x/(1+t)").unwrap();
        assert_eq!(q.mul(&r.parse("1+t").unwrap()), r.parse("x").unwrap());
    }
}
