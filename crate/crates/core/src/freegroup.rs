//! Truncated group-ring arithmetic on the free group `F_d`, with exact
//! rational coefficients.
//!
//! Words are reduced sequences of letters `+-1..+-d` (`-i` is the inverse
//! of generator `i`), ordered by length and then lexicographically.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Exec;

/// Largest sphere that will be enumerated.
pub const MAX_SPHERE_WORDS: u128 = 20_000_000;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Word(pub Vec<i8>);

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != -w[1])
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|x| -x).collect())
    }
}

impl fmt::Display for Word {
    /// Run-length form such as `a1^3 a2^-1`; the empty word is `e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        let mut i = 0;
        let mut first = true;
        while i < self.0.len() {
            let x = self.0[i];
            let mut j = i;
            while j < self.0.len() && self.0[j] == x {
                j += 1;
            }
            let run = (j - i) as i64 * if x > 0 { 1 } else { -1 };
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if run == 1 {
                write!(f, "a{}", x.abs())?;
            } else {
                write!(f, "a{}^{}", x.abs(), run)?;
            }
            i = j;
        }
        Ok(())
    }
}

/// Length of the reduced form of `a b`, and the number of cancelled pairs.
fn product_shape(a: &[i8], b: &[i8]) -> (usize, usize) {
    let mut k = 0;
    while k < a.len() && k < b.len() && a[a.len() - 1 - k] == -b[k] {
        k += 1;
    }
    (a.len() + b.len() - 2 * k, k)
}

fn reduced_product(a: &[i8], b: &[i8], k: usize) -> Word {
    let mut w = Vec::with_capacity(a.len() + b.len() - 2 * k);
    w.extend_from_slice(&a[..a.len() - k]);
    w.extend_from_slice(&b[k..]);
    Word(w)
}

/// A finitely supported element of `Q[F_d]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FreeGroupRingElement {
    d: usize,
    terms: BTreeMap<Word, BigRational>,
}

impl FreeGroupRingElement {
    pub fn zero(d: usize) -> Self {
        assert!(d >= 1 && d <= 127);
        Self { d, terms: BTreeMap::new() }
    }

    pub fn one(d: usize) -> Self {
        let mut out = Self::zero(d);
        out.terms.insert(Word(Vec::new()), BigRational::one());
        out
    }

    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = (Word, BigRational)>) -> Result<Self> {
        let mut out = Self::zero(d);
        for (w, c) in terms {
            if !w.is_reduced() || w.0.iter().any(|&x| x == 0 || x.unsigned_abs() as usize > d) {
                return Err(Error::InvalidParameter(format!("word {w} is not a reduced word over {d} generators")));
            }
            out.add_term(w, c);
        }
        Ok(out)
    }

    fn add_term(&mut self, w: Word, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &Word) -> BigRational {
        self.terms.get(w).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn l1_norm(&self) -> BigRational {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn max_length(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.d);
        }
        Self { d: self.d, terms: self.terms.iter().map(|(w, x)| (w.clone(), x * c)).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { left: self.d, right: other.d });
        }
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    /// Convolution product keeping only words of length `<= max_len`.
    pub fn mul_truncated(&self, other: &Self, max_len: usize, exec: Exec) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { left: self.d, right: other.d });
        }
        let left: Vec<(&Word, &BigRational)> = self.terms.iter().collect();
        let right: Vec<(&Word, &BigRational)> = other.terms.iter().collect();
        let chunks: Vec<&[(&Word, &BigRational)]> = left.chunks(256).collect();
        let partials = exec.map_slice(&chunks, |chunk| {
            let mut acc: BTreeMap<Word, BigRational> = BTreeMap::new();
            for (a, ca) in chunk.iter() {
                for (b, cb) in &right {
                    let (len, k) = product_shape(&a.0, &b.0);
                    if len > max_len {
                        continue;
                    }
                    *acc.entry(reduced_product(&a.0, &b.0, k)).or_insert_with(BigRational::zero) += *ca * *cb;
                }
            }
            acc
        });
        // exact arithmetic: the merge order does not affect the result
        let mut terms: BTreeMap<Word, BigRational> = BTreeMap::new();
        for part in partials {
            for (w, c) in part {
                *terms.entry(w).or_insert_with(BigRational::zero) += c;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(Self { d: self.d, terms })
    }
}

fn sphere_size(d: usize, n: usize) -> u128 {
    if n == 0 {
        return 1;
    }
    (2 * d as u128) * (2 * d as u128 - 1).saturating_pow(n as u32 - 1)
}

fn letters(d: usize) -> Vec<i8> {
    (1..=d as i8).flat_map(|i| [i, -i]).collect()
}

/// `chi_n`: the sum of all reduced words of length `n`.
pub fn sphere(d: usize, n: usize) -> Result<FreeGroupRingElement> {
    if d == 0 {
        return Err(Error::InvalidParameter("rank must be positive".into()));
    }
    let size = sphere_size(d, n);
    if size > MAX_SPHERE_WORDS {
        return Err(Error::CapExceeded(format!("sphere of radius {n} in F_{d} has {size} words")));
    }
    let mut words: Vec<Vec<i8>> = vec![Vec::new()];
    let alphabet = letters(d);
    for _ in 0..n {
        let mut next = Vec::with_capacity(words.len() * (2 * d));
        for w in &words {
            for &x in &alphabet {
                if w.last() != Some(&-x) {
                    let mut v = w.clone();
                    v.push(x);
                    next.push(v);
                }
            }
        }
        words = next;
    }
    Ok(FreeGroupRingElement { d, terms: words.into_iter().map(|w| (Word(w), BigRational::one())).collect() })
}

/// Coefficient `(-1)^n (2d-1)^{-n}` of `g` on words of length `2n`.
fn g_weight(d: usize, n: usize) -> BigRational {
    let q = BigInt::from(2 * d as i64 - 1);
    let mag = BigRational::new(BigInt::one(), num_traits::pow(q, n));
    if n % 2 == 0 {
        mag
    } else {
        -mag
    }
}

/// `g_N = sum_{n <= N} (-1)^n (2d-1)^{-n} chi_{2n}`, keeping only words of
/// length `<= max_len`.
pub fn annihilator_candidate(d: usize, order: usize, max_len: usize) -> Result<FreeGroupRingElement> {
    let mut out = FreeGroupRingElement::zero(d);
    for n in 0..=order {
        if 2 * n > max_len {
            break;
        }
        let s = sphere(d, 2 * n)?.scale(&g_weight(d, n));
        out.terms.extend(s.terms);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnihilatorReport {
    pub rank: usize,
    pub order: usize,
    pub radius: usize,
    /// Number of words of `g_N` that entered the product.
    pub candidate_terms: usize,
    /// Nonzero coefficients of `g_N chi_1` on words of length `<= radius`.
    pub nonzero_within_radius: usize,
    pub all_zero: bool,
    /// Where the truncated sum stops cancelling: length `2N + 1`.
    pub frontier_length: usize,
    pub frontier_word: String,
    pub frontier_coefficient: String,
    pub expected_frontier: String,
}

/// Checks that `g_N chi_1` vanishes exactly on the ball of radius `L`.
///
/// The product telescopes to `(-1)^N (2d-1)^{-N} chi_{2N+1}`, so any
/// `L <= 2N` is admissible. Only the part of `g_N` that can reach the ball
/// (lengths `<= L + 1`) is built; the frontier coefficient on
/// `a1^{2N+1}` is recovered separately from `(f chi_1)(w) = sum_a f(w a^-1)`.
pub fn verify_annihilator(d: usize, order: usize, radius: usize, exec: Exec) -> Result<AnnihilatorReport> {
    if radius > 2 * order {
        return Err(Error::InvalidParameter(format!(
            "radius {radius} exceeds 2N = {}; the product is nonzero at length 2N + 1",
            2 * order
        )));
    }
    let g = annihilator_candidate(d, order, radius + 1)?;
    let chi1 = sphere(d, 1)?;
    let prod = g.mul_truncated(&chi1, radius, exec)?;
    let frontier = Word(vec![1; 2 * order + 1]);
    let mut coef = BigRational::zero();
    for a in letters(d) {
        let (len, k) = product_shape(&frontier.0, &[-a]);
        let v = reduced_product(&frontier.0, &[-a], k);
        if len % 2 == 0 && len / 2 <= order {
            coef += g_weight(d, len / 2);
        }
        debug_assert_eq!(v.len(), len);
    }
    Ok(AnnihilatorReport {
        rank: d,
        order,
        radius,
        candidate_terms: g.len(),
        nonzero_within_radius: prod.len(),
        all_zero: prod.is_zero(),
        frontier_length: 2 * order + 1,
        frontier_word: frontier.to_string(),
        frontier_coefficient: coef.to_string(),
        expected_frontier: g_weight(d, order).to_string(),
    })
}
