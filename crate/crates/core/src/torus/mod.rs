//! Fourier evaluation on the dual torus, nonvanishing certificates and
//! truncated `l^1` inverses.
//!
//! For `Z^d`, `f` is invertible in `l^1(Z^d)` exactly when `f^` has no zero
//! on the torus (Wiener's lemma). A grid certificate checks `|f^|` on an
//! `m^d` grid and covers the gaps with a Lipschitz bound; zeros are only
//! reported when they are exact.

mod certify;
pub(crate) mod grid;
mod inverse;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exact::{exact_l1, ExactResidual};
use crate::groupring::{Exponent, GroupRingElement, TorusPoint};

pub use certify::{certify_invertible, certify_invertible_default, certify_matrix_invertible, default_grid};
pub use inverse::{l1_inverse, l1_inverse_certified, matrix_l1_inverse, MatrixL1Inverse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Invertible,
    NotInvertible,
    Unknown,
}

/// Outcome of a grid nonvanishing check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusCertificate {
    pub verdict: Verdict,
    pub grid_size: usize,
    pub grid_min: f64,
    pub lipschitz: f64,
    /// `grid_min - lipschitz / (2 grid_size)`.
    pub margin: f64,
    /// Bound on the floating-point error of the grid values; `Invertible`
    /// requires `margin > rounding_slack`.
    pub rounding_slack: f64,
    /// A torus point with `f^ = 0` exactly (only for `NotInvertible`).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Vec<f64>>,
    /// The determinant the verdict was derived from (matrix input only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub determinant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub guidance: Option<String>,
}

/// `f^(theta) = sum_n f_n e^{2 pi i n . theta}`.
pub fn evaluate(f: &GroupRingElement, theta: &TorusPoint) -> Complex64 {
    assert_eq!(f.dim(), theta.dim(), "dimension mismatch");
    let mut acc = Complex64::new(0.0, 0.0);
    for (e, c) in f.float_terms() {
        let t: f64 = e.iter().zip(theta.coords()).map(|(&n, &x)| n as f64 * x).sum();
        let phase = 2.0 * std::f64::consts::PI * t.rem_euclid(1.0);
        acc += Complex64::from_polar(c, phase);
    }
    acc
}

/// `2 pi sum_n |f_n| ||n||_1`, a Lipschitz constant of `f^` for the
/// max-metric on the torus.
pub fn lipschitz_bound(f: &GroupRingElement) -> f64 {
    let s: f64 = f
        .float_terms()
        .iter()
        .map(|(e, c)| c.abs() * e.iter().map(|x| x.unsigned_abs() as f64).sum::<f64>())
        .sum();
    2.0 * std::f64::consts::PI * s
}

/// A finitely supported real function on `Z^d` standing for an element of
/// `l^1(Z^d)`, with a bound on the mass that was cut off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Approximant {
    pub d: usize,
    #[serde(with = "terms_list")]
    pub terms: BTreeMap<Exponent, f64>,
    /// Certified bound on `||target - self||_1`; `None` when unknown.
    pub tail_bound: Option<f64>,
    /// Exact residual `||delta_e - g f||_1` when produced by inversion.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residual: Option<ExactResidual>,
    /// Truncation radius (max-norm) of the support.
    pub radius: i64,
}

mod terms_list {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::groupring::Exponent;

    pub fn serialize<S: Serializer>(t: &BTreeMap<Exponent, f64>, s: S) -> Result<S::Ok, S::Error> {
        t.iter().collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Exponent, f64>, D::Error> {
        Ok(Vec::<(Exponent, f64)>::deserialize(d)?.into_iter().collect())
    }
}

impl L1Approximant {
    pub fn zero(d: usize) -> Self {
        Self { d, terms: BTreeMap::new(), tail_bound: Some(0.0), residual: None, radius: 0 }
    }

    /// An exact finitely supported element (tail 0).
    pub fn exact(d: usize, terms: BTreeMap<Exponent, f64>) -> Self {
        let radius = terms.keys().map(|e| crate::window::sup_norm(e)).max().unwrap_or(0);
        Self { d, terms, tail_bound: Some(0.0), residual: None, radius }
    }

    pub fn coefficient(&self, e: &[i64]) -> f64 {
        self.terms.get(e).copied().unwrap_or(0.0)
    }

    /// `sum |g_n|`, rounded up.
    pub fn l1_norm(&self) -> f64 {
        exact_l1(self.terms.values().copied()).value
    }

    /// `l^1` mass outside the ball of radius `r`, rounded up.
    pub fn l1_outside(&self, r: i64) -> f64 {
        exact_l1(self.terms.iter().filter(|(e, _)| crate::window::sup_norm(e) > r).map(|(_, c)| *c)).value
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> GroupRingElement {
        s.parse().unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let f = p("3 - u1 - u1^-1");
        assert!((evaluate(&f, &TorusPoint::new(vec![0.0])) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((evaluate(&f, &TorusPoint::new(vec![0.5])) - Complex64::new(5.0, 0.0)).norm() < 1e-14);
        let h = p("4 - u1 - u1^-1 - u2 - u2^-1");
        assert!(evaluate(&h, &TorusPoint::zero(2)).norm() < 1e-14);
    }

    #[test]
    fn lipschitz_examples() {
        use std::f64::consts::PI;
        assert!((lipschitz_bound(&p("u1 - 2")) - 2.0 * PI).abs() < 1e-12);
        assert!((lipschitz_bound(&p("3 - u1 - u1^-1")) - 4.0 * PI).abs() < 1e-12);
        assert_eq!(lipschitz_bound(&p("5")), 0.0);
    }

    #[test]
    fn conjugate_symmetry() {
        let f = p("2 - 3*u1^2 + u1^-1 + 7*u1^5");
        for j in 0..50 {
            let t = TorusPoint::new(vec![j as f64 / 50.0 + 0.003]);
            let a = evaluate(&f.involution(), &t);
            let b = evaluate(&f, &t).conj();
            assert!((a - b).norm() < 1e-12);
        }
    }
}
