//! Finite boxes in `Z^d` and a fixed enumeration of `Z^d`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupring::Exponent;

/// The box `[lo_1, hi_1] x ... x [lo_d, hi_d]` (inclusive bounds).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl Window {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidParameter("window bounds must have equal positive length".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::InvalidParameter("window has an empty side".into()));
        }
        Ok(Self { lo, hi })
    }

    /// The ball `[-r, r]^d` of the max-norm.
    pub fn ball(d: usize, r: i64) -> Self {
        assert!(r >= 0);
        Self { lo: vec![-r; d], hi: vec![r; d] }
    }

    /// `[0, n-1]^d`.
    pub fn cube(d: usize, n: i64) -> Self {
        assert!(n >= 1);
        Self { lo: vec![0; d], hi: vec![n - 1; d] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l + 1) as usize).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, e: &[i64]) -> bool {
        e.len() == self.dim() && e.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| l <= x && x <= h)
    }

    /// Minkowski sum with the ball of radius `r`.
    pub fn expand(&self, r: i64) -> Self {
        Self { lo: self.lo.iter().map(|x| x - r).collect(), hi: self.hi.iter().map(|x| x + r).collect() }
    }

    pub fn shift(&self, s: &[i64]) -> Self {
        Self {
            lo: self.lo.iter().zip(s).map(|(a, b)| a + b).collect(),
            hi: self.hi.iter().zip(s).map(|(a, b)| a + b).collect(),
        }
    }

    /// Reflection `F -> -F`.
    pub fn negate(&self) -> Self {
        Self { lo: self.hi.iter().map(|x| -x).collect(), hi: self.lo.iter().map(|x| -x).collect() }
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.lo.iter().zip(&self.hi).zip(other.lo.iter().zip(&other.hi)).all(|((l1, h1), (l2, h2))| l1.max(l2) <= h1.min(h2))
    }

    /// Points in lexicographic order.
    pub fn points(&self) -> Vec<Exponent> {
        let mut out = Vec::with_capacity(self.len());
        let mut cur = self.lo.clone();
        loop {
            out.push(cur.clone());
            let mut i = self.dim();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < self.hi[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = self.lo[i];
            }
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (l, h)) in self.lo.iter().zip(&self.hi).enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}..{h}")?;
        }
        Ok(())
    }
}

impl FromStr for Window {
    type Err = Error;

    /// `"lo..hi[,lo..hi...]"` with inclusive bounds, or a bare `N` meaning
    /// `0..N-1` in one dimension.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: &str| Error::InvalidParameter(format!("window '{s}': {msg}"));
        if let Ok(n) = s.parse::<i64>() {
            if n < 1 {
                return Err(bad("size must be positive"));
            }
            return Ok(Self::cube(1, n));
        }
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for part in s.split(',') {
            let (a, b) = part.split_once("..").ok_or_else(|| bad("expected lo..hi"))?;
            lo.push(a.trim().parse::<i64>().map_err(|_| bad("bad lower bound"))?);
            hi.push(b.trim().parse::<i64>().map_err(|_| bad("bad upper bound"))?);
        }
        Self::new(lo, hi)
    }
}

/// `||n||_inf`.
pub fn sup_norm(e: &[i64]) -> i64 {
    e.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// The first `count` elements of `Z^d` in the fixed enumeration used for
/// the summable metric: by increasing max-norm, lexicographic within a
/// shell. Starts with the origin.
pub fn spiral(d: usize, count: usize) -> Vec<Exponent> {
    let mut out = Vec::with_capacity(count);
    let mut r = 0i64;
    while out.len() < count {
        for p in Window::ball(d, r).points() {
            if sup_norm(&p) == r {
                out.push(p);
                if out.len() == count {
                    break;
                }
            }
        }
        r += 1;
    }
    out
}
