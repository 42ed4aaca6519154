use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exponent vector of a monomial `u_1^{n_1} ... u_d^{n_d}`.
pub type Exponent = Vec<i64>;

/// Products whose exponent bounding box has at most this many cells are
/// accumulated in a dense buffer; larger ones use sort-and-merge.
const DENSE_PRODUCT_CELLS: u128 = 1 << 14;

/// An element of the integral group ring `Z[Z^d]`, i.e. a Laurent polynomial
/// in `u_1, ..., u_d` with integer coefficients.
///
/// Terms are kept in a `BTreeMap` keyed by exponent vector (lexicographic
/// order) with zero coefficients removed, so equality is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupRingElement {
    d: usize,
    terms: BTreeMap<Exponent, BigInt>,
}

impl GroupRingElement {
    pub fn zero(d: usize) -> Self {
        assert!(d > 0, "group ring dimension must be positive");
        Self { d, terms: BTreeMap::new() }
    }

    pub fn one(d: usize) -> Self {
        Self::constant(d, 1)
    }

    pub fn constant(d: usize, c: impl Into<BigInt>) -> Self {
        Self::monomial(d, vec![0; d], c)
    }

    /// `c * u^exp`. Panics if `exp.len() != d`.
    pub fn monomial(d: usize, exp: Exponent, c: impl Into<BigInt>) -> Self {
        assert_eq!(exp.len(), d, "exponent length must equal the dimension");
        let mut out = Self::zero(d);
        let c = c.into();
        if !c.is_zero() {
            out.terms.insert(exp, c);
        }
        out
    }

    /// The generator `u_{i+1}` (zero-based `i`).
    pub fn variable(d: usize, i: usize) -> Self {
        assert!(i < d);
        let mut e = vec![0; d];
        e[i] = 1;
        Self::monomial(d, e, 1)
    }

    /// Builds an element from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms<I, C>(d: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, C)>,
        C: Into<BigInt>,
    {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let mut out = Self::zero(d);
        for (e, c) in terms {
            if e.len() != d {
                return Err(Error::DimensionMismatch { left: d, right: e.len() });
            }
            out.add_term(e, c.into());
        }
        Ok(out)
    }

    fn add_term(&mut self, e: Exponent, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
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

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.iter().all(|(e, c)| c.is_one() && e.iter().all(|&x| x == 0))
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&Exponent, &BigInt)> + '_ {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &[i64]) -> BigInt {
        self.terms.get(e).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Value of `f̂` at the trivial character: the sum of all coefficients.
    pub fn coefficient_sum(&self) -> BigInt {
        self.terms.values().sum()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { left: self.d, right: other.d });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        Ok(out)
    }

    /// Convolution product.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.d));
        }
        let (lo_a, hi_a) = self.bounds().expect("nonzero");
        let (lo_b, hi_b) = other.bounds().expect("nonzero");
        let lo: Vec<i64> = lo_a.iter().zip(&lo_b).map(|(a, b)| a + b).collect();
        let hi: Vec<i64> = hi_a.iter().zip(&hi_b).map(|(a, b)| a + b).collect();
        let cells = lo
            .iter()
            .zip(&hi)
            .try_fold(1u128, |acc, (l, h)| acc.checked_mul((h - l + 1) as u128));
        let sparse = (self.len() * other.len()) as u128;
        match cells {
            Some(c) if c <= DENSE_PRODUCT_CELLS && c <= 4 * sparse.max(16) => {
                Ok(self.mul_dense(other, &lo, &hi))
            }
            _ => Ok(self.mul_merge(other)),
        }
    }

    fn mul_dense(&self, other: &Self, lo: &[i64], hi: &[i64]) -> Self {
        let widths: Vec<usize> = lo.iter().zip(hi).map(|(l, h)| (h - l + 1) as usize).collect();
        let size: usize = widths.iter().product();
        let mut acc = vec![BigInt::zero(); size];
        let index = |e: &[i64]| -> usize {
            e.iter()
                .zip(lo)
                .zip(&widths)
                .fold(0usize, |idx, ((x, l), w)| idx * w + (x - l) as usize)
        };
        let mut e = vec![0i64; self.d];
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                for i in 0..self.d {
                    e[i] = ea[i] + eb[i];
                }
                acc[index(&e)] += ca * cb;
            }
        }
        let mut terms = BTreeMap::new();
        for (flat, c) in acc.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut exp = vec![0i64; self.d];
            let mut rest = flat;
            for i in (0..self.d).rev() {
                exp[i] = lo[i] + (rest % widths[i]) as i64;
                rest /= widths[i];
            }
            terms.insert(exp, c);
        }
        Self { d: self.d, terms }
    }

    fn mul_merge(&self, other: &Self) -> Self {
        let mut products: Vec<(Exponent, BigInt)> = Vec::with_capacity(self.len() * other.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                products.push((e, ca * cb));
            }
        }
        products.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut terms = BTreeMap::new();
        let mut iter = products.into_iter();
        if let Some((mut cur_e, mut cur_c)) = iter.next() {
            for (e, c) in iter {
                if e == cur_e {
                    cur_c += c;
                } else {
                    if !cur_c.is_zero() {
                        terms.insert(cur_e, cur_c);
                    }
                    cur_e = e;
                    cur_c = c;
                }
            }
            if !cur_c.is_zero() {
                terms.insert(cur_e, cur_c);
            }
        }
        Self { d: self.d, terms }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.d);
        }
        Self { d: self.d, terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect() }
    }

    /// Multiplication by the monomial `u^shift`.
    pub fn shift(&self, shift: &[i64]) -> Self {
        assert_eq!(shift.len(), self.d);
        Self {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().zip(shift).map(|(a, b)| a + b).collect(), c.clone()))
                .collect(),
        }
    }

    /// The involution `sum f_s s -> sum f_s s^{-1}`.
    pub fn involution(&self) -> Self {
        Self {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().map(|x| -x).collect(), c.clone()))
                .collect(),
        }
    }

    /// `||f||_1`, the sum of absolute coefficient values.
    pub fn l1_norm(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn l1_norm_f64(&self) -> f64 {
        self.l1_norm().to_f64().unwrap_or(f64::INFINITY)
    }

    /// Coordinatewise minimum and maximum exponents, `None` for zero.
    pub fn bounds(&self) -> Option<(Exponent, Exponent)> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for e in it {
            for i in 0..self.d {
                lo[i] = lo[i].min(e[i]);
                hi[i] = hi[i].max(e[i]);
            }
        }
        Some((lo, hi))
    }

    /// Largest `||n||_inf` over the support (0 for the zero element).
    pub fn support_radius(&self) -> i64 {
        self.terms.keys().flat_map(|e| e.iter().map(|x| x.abs())).max().unwrap_or(0)
    }

    /// Coefficients as `f64` (used by the analytic layer).
    pub fn float_terms(&self) -> Vec<(Exponent, f64)> {
        self.terms
            .iter()
            .map(|(e, c)| (e.clone(), c.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    /// Exact quotient `self / divisor` if `divisor` divides `self` in
    /// `Z[Z^d]`, otherwise `None`.
    ///
    /// Long division by leading terms in lexicographic order; the Newton
    /// polytope of the quotient is confined to the box
    /// `[min(self) - min(divisor), max(self) - max(divisor)]`, which bounds
    /// the search.
    pub fn exact_div(&self, divisor: &Self) -> Result<Option<Self>> {
        self.check_dim(divisor)?;
        if divisor.is_zero() {
            return Err(Error::InvalidParameter("division by zero".into()));
        }
        if self.is_zero() {
            return Ok(Some(Self::zero(self.d)));
        }
        if divisor.len() == 1 {
            let (e, c) = divisor.terms.iter().next().expect("one term");
            let mut terms = BTreeMap::new();
            for (ea, ca) in &self.terms {
                let (q, r) = ca.div_rem(c);
                if !r.is_zero() {
                    return Ok(None);
                }
                terms.insert(ea.iter().zip(e).map(|(a, b)| a - b).collect(), q);
            }
            return Ok(Some(Self { d: self.d, terms }));
        }
        let (lo_f, hi_f) = self.bounds().expect("nonzero");
        let (lo_g, hi_g) = divisor.bounds().expect("nonzero");
        let q_lo: Vec<i64> = lo_f.iter().zip(&lo_g).map(|(a, b)| a - b).collect();
        let q_hi: Vec<i64> = hi_f.iter().zip(&hi_g).map(|(a, b)| a - b).collect();
        if q_lo.iter().zip(&q_hi).any(|(l, h)| l > h) {
            return Ok(None);
        }
        let (lead_e, lead_c) = divisor.terms.iter().next_back().expect("nonzero");
        let mut rem = self.clone();
        let mut quotient = BTreeMap::new();
        while let Some((re, rc)) = rem.terms.iter().next_back() {
            let (q, r) = rc.div_rem(lead_c);
            if !r.is_zero() {
                return Ok(None);
            }
            let qe: Exponent = re.iter().zip(lead_e).map(|(a, b)| a - b).collect();
            if qe.iter().zip(q_lo.iter().zip(&q_hi)).any(|(x, (l, h))| x < l || x > h) {
                return Ok(None);
            }
            for (ge, gc) in &divisor.terms {
                let e: Exponent = ge.iter().zip(&qe).map(|(a, b)| a + b).collect();
                rem.add_term(e, -(gc * &q));
            }
            quotient.insert(qe, q);
            if rem.len() > crate::caps::MAX_POLY_TERMS {
                return Err(Error::ExpressionSwell {
                    terms: rem.len(),
                    cap: crate::caps::MAX_POLY_TERMS,
                });
            }
        }
        Ok(Some(Self { d: self.d, terms: quotient }))
    }

    /// Terms in display order: by `||n||_1`, then lexicographically
    /// descending, so `3 - u1 - u1^-1` prints in that order.
    fn display_terms(&self) -> Vec<(&Exponent, &BigInt)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| {
            let na: i64 = a.0.iter().map(|x| x.abs()).sum();
            let nb: i64 = b.0.iter().map(|x| x.abs()).sum();
            na.cmp(&nb).then_with(|| b.0.cmp(a.0))
        });
        v
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.display_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (idx, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let is_const = e.iter().all(|&x| x == 0);
            if is_const {
                write!(f, "{mag}")?;
                continue;
            }
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            let mut first = true;
            for (i, &x) in e.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                if x == 1 {
                    write!(f, "u{}", i + 1)?;
                } else {
                    write!(f, "u{}^{}", i + 1, x)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupRingElement(d={}, {})", self.d, self)
    }
}

impl Add for &GroupRingElement {
    type Output = GroupRingElement;
    /// Panics on dimension mismatch; see [`GroupRingElement::checked_add`].
    fn add(self, rhs: Self) -> GroupRingElement {
        self.checked_add(rhs).expect("dimension mismatch")
    }
}

impl Sub for &GroupRingElement {
    type Output = GroupRingElement;
    fn sub(self, rhs: Self) -> GroupRingElement {
        self.checked_sub(rhs).expect("dimension mismatch")
    }
}

impl Mul for &GroupRingElement {
    type Output = GroupRingElement;
    fn mul(self, rhs: Self) -> GroupRingElement {
        self.checked_mul(rhs).expect("dimension mismatch")
    }
}

impl Neg for &GroupRingElement {
    type Output = GroupRingElement;
    fn neg(self) -> GroupRingElement {
        GroupRingElement {
            d: self.d,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> GroupRingElement {
        s.parse().unwrap()
    }

    #[test]
    fn add_examples() {
        assert!((&p("u1 - 2") + &p("2 - u1")).is_zero());
        assert_eq!(&p("u1 - 2") + &p("u1 + 2"), p("2*u1"));
        let h = p("4 - u1 - u1^-1 - u2 - u2^-1");
        assert!((&h + &(-&h)).is_zero());
    }

    #[test]
    fn mul_examples() {
        assert_eq!(&p("u1 - 2") * &p("u1 + 2"), p("u1^2 - 4"));
        assert_eq!(&p("u1 - 2") * &GroupRingElement::one(1), p("u1 - 2"));
        let f = p("3 - u1 - u1^-1");
        assert_eq!(&f * &f, p("11 - 6*u1 - 6*u1^-1 + u1^2 + u1^-2"));
    }

    #[test]
    fn dense_and_merge_products_agree() {
        let f = p("3 - u1 + 7*u1^40 - u1^-33 + 2*u1^5");
        let g = p("1 + u1^900 - 5*u1^-700");
        let (lo, hi) = {
            let (la, ha) = f.bounds().unwrap();
            let (lb, hb) = g.bounds().unwrap();
            (vec![la[0] + lb[0]], vec![ha[0] + hb[0]])
        };
        assert_eq!(f.mul_dense(&g, &lo, &hi), f.mul_merge(&g));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = GroupRingElement::one(1);
        let b = GroupRingElement::one(2);
        assert_eq!(a.checked_add(&b), Err(Error::DimensionMismatch { left: 1, right: 2 }));
        assert!(a.checked_mul(&b).is_err());
    }

    #[test]
    fn involution_examples() {
        assert_eq!(p("u1 - 2").involution(), p("u1^-1 - 2"));
        let f = p("3 - u1 - u1^-1");
        assert_eq!(f.involution(), f);
    }

    #[test]
    fn l1_norm_examples() {
        assert_eq!(p("u1 - 2").l1_norm(), BigInt::from(3));
        assert_eq!(p("4 - u1 - u1^-1 - u2 - u2^-1").l1_norm(), BigInt::from(8));
        assert_eq!(GroupRingElement::zero(3).l1_norm(), BigInt::zero());
    }

    #[test]
    fn exact_division() {
        let f = crate::groupring::parse_with_dim("3 - u1 - u1^-1", 2).unwrap();
        let g = p("u1 - 2 + u2^3");
        let fg = &f * &g;
        assert_eq!(fg.exact_div(&g).unwrap(), Some(f.clone()));
        assert_eq!(fg.exact_div(&f).unwrap(), Some(g.clone()));
        assert_eq!(p("u1 + 1").exact_div(&p("u1 - 1")).unwrap(), None);
        assert_eq!(p("2*u1 + 2").exact_div(&p("2")).unwrap(), Some(p("u1 + 1")));
        assert_eq!(p("3*u1 + 2").exact_div(&p("2")).unwrap(), None);
        // x^2 - y^2 = (x - y)(x + y) in two variables
        assert_eq!(p("u1^2 - u2^2").exact_div(&p("u1 - u2")).unwrap(), Some(p("u1 + u2")));
        assert_eq!(p("u1^2 + u2^2").exact_div(&p("u1 - u2")).unwrap(), None);
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(p("-u1^-1 + 3 - u1").to_string(), "3 - u1 - u1^-1");
        assert_eq!(p("0").to_string(), "0");
        assert_eq!(p("-2*u1*u2^-1").to_string(), "-2*u1*u2^-1");
    }
}
