//! Text grammar for group ring elements.
//!
//! ```text
//! expr   := [sign] term (sign term)*
//! term   := factor ('*'? factor)*
//! factor := integer | 'u' [index] ['^' [sign] integer]
//! ```
//!
//! Whitespace is insignificant; `u` without an index means `u1`. The
//! dimension is the largest variable index that occurs (at least 1) unless
//! fixed by [`parse_with_dim`].

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::GroupRingElement;
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

struct RawTerm {
    coef: BigInt,
    powers: Vec<(usize, i64)>,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { position: self.pos, message: message.into() })
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

    fn digits(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.src[start..self.pos]).expect("ascii"))
    }

    fn expr(&mut self) -> Result<Vec<RawTerm>> {
        let mut out = Vec::new();
        let mut negate = false;
        match self.peek() {
            Some(b'-') => {
                negate = true;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            None => return self.err("empty expression"),
            _ => {}
        }
        loop {
            let mut t = self.term()?;
            if negate {
                t.coef = -t.coef;
            }
            out.push(t);
            match self.peek() {
                None => return Ok(out),
                Some(b'+') => negate = false,
                Some(b'-') => negate = true,
                Some(c) => return self.err(format!("unexpected character '{}'", c as char)),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<RawTerm> {
        let mut t = RawTerm { coef: BigInt::one(), powers: Vec::new() };
        self.factor(&mut t)?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    self.factor(&mut t)?;
                }
                Some(c) if c == b'u' || c.is_ascii_digit() => self.factor(&mut t)?,
                _ => return Ok(t),
            }
        }
    }

    fn factor(&mut self, t: &mut RawTerm) -> Result<()> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let ds = self.digits().expect("digit present");
                let n: BigInt = ds.parse().expect("digits parse");
                t.coef *= n;
                Ok(())
            }
            Some(b'u') => {
                self.pos += 1;
                let index = match self.digits() {
                    Some(ds) => {
                        let i: usize = match ds.parse() {
                            Ok(i) => i,
                            Err(_) => return self.err("variable index too large"),
                        };
                        if i == 0 {
                            return self.err("variable indices start at 1");
                        }
                        i
                    }
                    None => 1,
                };
                let mut power = 1i64;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    let mut sign = 1i64;
                    match self.peek() {
                        Some(b'-') => {
                            sign = -1;
                            self.pos += 1;
                        }
                        Some(b'+') => self.pos += 1,
                        _ => {}
                    }
                    self.skip_ws();
                    let Some(ds) = self.digits() else {
                        return self.err("expected exponent after '^'");
                    };
                    power = match ds.parse::<i64>() {
                        Ok(p) => sign * p,
                        Err(_) => return self.err("exponent too large"),
                    };
                }
                t.powers.push((index, power));
                Ok(())
            }
            Some(c) => self.err(format!("unexpected character '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }
}

fn assemble(raw: Vec<RawTerm>, d: usize) -> Result<GroupRingElement> {
    let mut terms = Vec::with_capacity(raw.len());
    for t in raw {
        let mut e = vec![0i64; d];
        for (i, p) in t.powers {
            if i > d {
                return Err(Error::DimensionMismatch { left: d, right: i });
            }
            e[i - 1] += p;
        }
        if !t.coef.is_zero() {
            terms.push((e, t.coef));
        }
    }
    GroupRingElement::from_terms(d, terms)
}

fn parse_raw(s: &str) -> Result<Vec<RawTerm>> {
    Parser { src: s.as_bytes(), pos: 0 }.expr()
}

/// Parses with a fixed dimension `d`; variables beyond `u_d` are an error.
pub fn parse_with_dim(s: &str, d: usize) -> Result<GroupRingElement> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    assemble(parse_raw(s)?, d)
}

/// Largest variable index occurring in `s` (at least 1).
pub fn inferred_dim(s: &str) -> Result<usize> {
    let raw = parse_raw(s)?;
    Ok(raw.iter().flat_map(|t| t.powers.iter().map(|p| p.0)).max().unwrap_or(1).max(1))
}

impl FromStr for GroupRingElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let raw = parse_raw(s)?;
        let d = raw.iter().flat_map(|t| t.powers.iter().map(|p| p.0)).max().unwrap_or(1).max(1);
        assemble(raw, d)
    }
}
