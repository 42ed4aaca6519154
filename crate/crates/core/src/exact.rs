//! Exact dyadic arithmetic for residual certificates.
//!
//! Every finite `f64` is `mantissa * 2^exponent` with integer mantissa, so a
//! finite family of doubles can be scaled to integers at a common exponent
//! and combined with integer-coefficient group ring elements without any
//! rounding.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::groupring::{Exponent, GroupRingElement};

/// An exactly computed nonnegative dyadic number `numerator * 2^exponent`,
/// together with an `f64` that is guaranteed not to be smaller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResidual {
    #[serde(with = "bigint_string")]
    pub numerator: BigInt,
    pub exponent: i64,
    /// Upper bound for the exact value, rounded towards `+inf`.
    pub value: f64,
}

mod bigint_string {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `(mantissa, exponent)` with `x = mantissa * 2^exponent`. Panics on
/// non-finite input.
pub(crate) fn decompose(x: f64) -> (i64, i64) {
    assert!(x.is_finite(), "non-finite value in exact arithmetic");
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (mant, exp) = if raw_exp == 0 { (frac, -1074) } else { (frac | (1 << 52), raw_exp - 1075) };
    let tz = mant.trailing_zeros() as i64;
    (sign * (mant >> tz), exp + tz)
}

/// Upper bound for `n * 2^e` as an `f64`.
fn dyadic_upper(n: &BigInt, e: i64) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    // Keep the top 64 bits; the discarded part only lowers the value, so
    // rounding the truncated mantissa up gives an upper bound.
    let bits = n.bits() as i64;
    let shift = (bits - 64).max(0);
    let top: BigInt = n >> (shift as usize);
    let approx = top.to_f64().expect("64-bit value");
    let mut v = scale_pow2(approx, e + shift);
    // two ulps cover the truncation and the conversion rounding
    v = v.next_up().next_up();
    if shift > 0 || !v.is_finite() {
        v = v.next_up();
    }
    v
}

fn scale_pow2(x: f64, e: i64) -> f64 {
    // powi on 2.0 is exact within the normal range; split large shifts
    let mut v = x;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

impl ExactResidual {
    pub fn zero() -> Self {
        Self { numerator: BigInt::zero(), exponent: 0, value: 0.0 }
    }

    fn new(numerator: BigInt, exponent: i64) -> Self {
        let value = dyadic_upper(&numerator, exponent);
        Self { numerator, exponent, value }
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// Exact comparison with a double.
    pub fn cmp_f64(&self, x: f64) -> Ordering {
        let (m, e) = decompose(x);
        let lhs = &self.numerator;
        let rhs = BigInt::from(m);
        let common = self.exponent.min(e);
        let l = lhs << ((self.exponent - common) as usize);
        let r = rhs << ((e - common) as usize);
        l.cmp(&r)
    }

    pub fn le_f64(&self, x: f64) -> bool {
        self.cmp_f64(x) != Ordering::Greater
    }
}

/// A family of real Laurent polynomials with `f64` coefficients, scaled to
/// integer polynomials at one common power of two.
pub(crate) struct ScaledFamily {
    pub polys: Vec<GroupRingElement>,
    pub exponent: i64,
}

pub(crate) fn scale_family(d: usize, family: &[&BTreeMap<Exponent, f64>]) -> ScaledFamily {
    let mut min_exp = i64::MAX;
    let decomposed: Vec<Vec<(Exponent, i64, i64)>> = family
        .iter()
        .map(|p| {
            p.iter()
                .filter(|(_, &c)| c != 0.0)
                .map(|(e, &c)| {
                    let (m, x) = decompose(c);
                    min_exp = min_exp.min(x);
                    (e.clone(), m, x)
                })
                .collect()
        })
        .collect();
    if min_exp == i64::MAX {
        min_exp = 0;
    }
    // Keep the scale at most 1 so that the identity is an integer too.
    let exponent = min_exp.min(0);
    let polys = decomposed
        .into_iter()
        .map(|terms| {
            GroupRingElement::from_terms(
                d,
                terms.into_iter().map(|(e, m, x)| (e, BigInt::from(m) << ((x - exponent) as usize))),
            )
            .expect("consistent dimension")
        })
        .collect();
    ScaledFamily { polys, exponent }
}

/// Exact `|| delta_e - g f ||_1` for real `g` and integer `f`.
pub(crate) fn scalar_residual(g: &BTreeMap<Exponent, f64>, f: &GroupRingElement) -> ExactResidual {
    matrix_residual(1, f.dim(), &[g], std::slice::from_ref(f))
}

/// Exact `|| I - G A ||_1` (sum of entry norms) for a real `k x k` matrix
/// `G` and an integer `k x k` matrix `A`, both given row-major.
pub(crate) fn matrix_residual(
    k: usize,
    d: usize,
    g: &[&BTreeMap<Exponent, f64>],
    a: &[GroupRingElement],
) -> ExactResidual {
    assert_eq!(g.len(), k * k);
    assert_eq!(a.len(), k * k);
    let scaled = scale_family(d, g);
    let e = scaled.exponent;
    let unit = GroupRingElement::constant(d, BigInt::from(1) << ((-e) as usize));
    let mut total = BigInt::zero();
    for i in 0..k {
        for j in 0..k {
            let mut acc = if i == j { unit.clone() } else { GroupRingElement::zero(d) };
            for l in 0..k {
                acc = &acc - &(&scaled.polys[i * k + l] * &a[l * k + j]);
            }
            total += acc.terms().map(|(_, c)| c.abs()).sum::<BigInt>();
        }
    }
    ExactResidual::new(total, e)
}

/// Exact `sum |c|` over the coefficients.
pub(crate) fn exact_l1(values: impl IntoIterator<Item = f64>) -> ExactResidual {
    let parts: Vec<(i64, i64)> = values.into_iter().filter(|v| *v != 0.0).map(decompose).collect();
    let Some(min_exp) = parts.iter().map(|p| p.1).min() else {
        return ExactResidual::zero();
    };
    let total: BigInt = parts.iter().map(|(m, x)| BigInt::from(m.abs()) << ((x - min_exp) as usize)).sum();
    ExactResidual::new(total, min_exp)
}
