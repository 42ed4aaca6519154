//! Expansiveness and finite-entropy decisions for finitely presented
//! actions `X = dual of (Z[Z^d])^k / (Z[Z^d])^n A`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupring::{GroupRingElement, GroupRingMatrix};
use crate::par::Exec;
use crate::torus::{certify_invertible, certify_matrix_invertible, default_grid, TorusCertificate, Verdict};

/// The action dual to `(Z[Z^d])^k / (Z[Z^d])^n A` for an `n x k` matrix `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct PresentedAction {
    pub a: GroupRingMatrix,
}

impl PresentedAction {
    pub fn new(a: GroupRingMatrix) -> Self {
        Self { a }
    }

    /// The principal action `X_f`.
    pub fn principal(f: GroupRingElement) -> Self {
        Self { a: GroupRingMatrix::scalar(f) }
    }

    /// Number of generators `k` (columns).
    pub fn k(&self) -> usize {
        self.a.cols()
    }

    /// Number of relations `n` (rows).
    pub fn n(&self) -> usize {
        self.a.rows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExpansiveVerdict {
    Expansive,
    NotExpansive,
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansivenessReport {
    pub verdict: ExpansiveVerdict,
    /// `1 / ||A||_1` as an exact fraction, when expansive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant_value: Option<f64>,
    pub l1_norm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<TorusCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn report_from(cert: Result<TorusCertificate>, norm: BigInt) -> ExpansivenessReport {
    let l1_norm = norm.to_string();
    match cert {
        Err(e) => ExpansivenessReport {
            verdict: ExpansiveVerdict::Unknown,
            constant: None,
            constant_value: None,
            l1_norm,
            certificate: None,
            note: Some(e.to_string()),
        },
        Ok(cert) => {
            let verdict = match cert.verdict {
                Verdict::Invertible => ExpansiveVerdict::Expansive,
                Verdict::NotInvertible => ExpansiveVerdict::NotExpansive,
                Verdict::Unknown => ExpansiveVerdict::Unknown,
            };
            let (constant, constant_value) = if verdict == ExpansiveVerdict::Expansive && !norm.is_zero() {
                (Some(format!("1/{norm}")), Some(1.0 / num_traits::ToPrimitive::to_f64(&norm).unwrap_or(f64::INFINITY)))
            } else {
                (None, None)
            };
            let note = cert.guidance.clone();
            ExpansivenessReport { verdict, constant, constant_value, l1_norm, certificate: Some(cert), note }
        }
    }
}

/// Expansiveness of the principal action `X_f`: `f` invertible in `l^1`.
/// Failures of the certificate are reported as `Unknown`.
pub fn is_expansive_principal(f: &GroupRingElement, grid: Option<usize>, exec: Exec) -> ExpansivenessReport {
    let m = grid.unwrap_or_else(|| default_grid(f.dim()));
    report_from(certify_invertible(f, m, exec), f.l1_norm())
}

/// Expansiveness of `X_A` for square `A`, through the determinant. The
/// expansive constant `1/||A||_1` bounds `sup_s rho(x_s, 0)` from below for
/// every nonzero point.
pub fn is_expansive_square(action: &PresentedAction, grid: Option<usize>, exec: Exec) -> Result<ExpansivenessReport> {
    if !action.a.is_square() {
        return Err(Error::ShapeMismatch(format!("{}x{} presentation is not square", action.n(), action.k())));
    }
    // Expression swell in the determinant is a hard error, not a verdict.
    action.a.determinant()?;
    Ok(report_from(certify_matrix_invertible(&action.a, grid, exec), action.a.l1_norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Finiteness {
    Finite,
    Infinite,
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiniteEntropyReport {
    pub verdict: Finiteness,
    pub k: usize,
    pub n: usize,
    /// Rank of `A` over the fraction field of `Z[Z^d]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    /// Nonzero `a` with `a A* = 0` (only for `Infinite`).
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_witness")]
    pub witness: Option<Vec<GroupRingElement>>,
    pub witness_verified: bool,
    /// `Some(true)` when 1-expansive, `Some(false)` when not.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub one_expansive: Option<bool>,
    pub note: String,
}

fn ser_witness<S: serde::Serializer>(w: &Option<Vec<GroupRingElement>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let strs: Option<Vec<String>> = w.as_ref().map(|v| v.iter().map(|e| e.to_string()).collect());
    strs.serialize(s)
}

/// Divides out the integer content and any common factor found among the
/// entries themselves, so `(u-2, -(u-2))` becomes `(1, -1)`.
fn simplify_witness(mut v: Vec<GroupRingElement>) -> Vec<GroupRingElement> {
    let content = v
        .iter()
        .flat_map(|e| e.terms().map(|(_, c)| c.abs()))
        .fold(BigInt::zero(), |acc, c| acc.gcd(&c));
    if !content.is_zero() && !content.is_one() {
        v = v
            .into_iter()
            .map(|e| e.exact_div(&GroupRingElement::constant(e.dim(), content.clone())).ok().flatten().expect("content divides"))
            .collect();
    }
    let mut candidates: Vec<GroupRingElement> = v.iter().filter(|e| !e.is_zero()).cloned().collect();
    candidates.sort_by_key(|e| e.len());
    for c in candidates {
        let quotients: Option<Vec<GroupRingElement>> =
            v.iter().map(|e| e.exact_div(&c).ok().flatten()).collect();
        if let Some(q) = quotients {
            return q;
        }
    }
    v
}

/// Decides whether `a -> a A*` is injective on `(Z[Z^d])^k`, which is
/// equivalent both to finite entropy and to 1-expansiveness of the action.
pub fn has_finite_entropy(action: &PresentedAction) -> FiniteEntropyReport {
    let (k, n) = (action.k(), action.n());
    // (a A*)_j = sum_i conj(A_{ji}) a_i, so the kernel of a -> a A* is the
    // right kernel of the entrywise-conjugated A.
    let conj = action.a.conjugate();
    let unknown = |e: Error| FiniteEntropyReport {
        verdict: Finiteness::Unknown,
        k,
        n,
        rank: None,
        witness: None,
        witness_verified: false,
        one_expansive: None,
        note: format!("elimination aborted: {e}"),
    };
    let profile = match conj.rank_profile() {
        Ok(p) => p,
        Err(e) => return unknown(e),
    };
    if profile.rank == k {
        return FiniteEntropyReport {
            verdict: Finiteness::Finite,
            k,
            n,
            rank: Some(k),
            witness: None,
            witness_verified: false,
            one_expansive: Some(true),
            note: format!(
                "rank {k} = k: a -> aA* is injective, hence finite entropy, equivalently 1-expansive"
            ),
        };
    }
    let witness = match conj.right_kernel_vector() {
        Ok(Some(v)) => simplify_witness(v),
        Ok(None) => return unknown(Error::InvalidModule("rank deficient but no kernel vector".into())),
        Err(e) => return unknown(e),
    };
    let verified = action
        .a
        .involution()
        .left_mul_row(&witness)
        .map(|row| row.iter().all(|x| x.is_zero()))
        .unwrap_or(false)
        && witness.iter().any(|x| !x.is_zero());
    if !verified {
        return unknown(Error::InvalidModule("kernel witness failed verification".into()));
    }
    FiniteEntropyReport {
        verdict: Finiteness::Infinite,
        k,
        n,
        rank: Some(profile.rank),
        witness: Some(witness),
        witness_verified: true,
        one_expansive: Some(false),
        note: format!(
            "rank {} < k = {k}: the witness a satisfies aA* = 0, so the entropy is infinite and the action is not 1-expansive",
            profile.rank
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupring::matrix_from_strs;

    fn p(s: &str) -> GroupRingElement {
        s.parse().unwrap()
    }

    #[test]
    fn principal_examples() {
        let r = is_expansive_principal(&p("3 - u1 - u1^-1"), None, Exec::default());
        assert_eq!(r.verdict, ExpansiveVerdict::Expansive);
        assert_eq!(r.constant.as_deref(), Some("1/5"));
        let h = is_expansive_principal(&p("4 - u1 - u1^-1 - u2 - u2^-1"), None, Exec::default());
        assert_eq!(h.verdict, ExpansiveVerdict::NotExpansive);
        let g = is_expansive_principal(&p("u1 - 2"), None, Exec::default());
        assert_eq!(g.constant.as_deref(), Some("1/3"));
    }

    #[test]
    fn square_examples() {
        let id = PresentedAction::new(matrix_from_strs(&[&["1", "0"], &["0", "1"]]).unwrap());
        assert_eq!(is_expansive_square(&id, None, Exec::default()).unwrap().verdict, ExpansiveVerdict::Expansive);
        let a = PresentedAction::new(matrix_from_strs(&[&["3 - u1", "1"], &["0", "3 - u1^-1"]]).unwrap());
        assert_eq!(is_expansive_square(&a, None, Exec::default()).unwrap().verdict, ExpansiveVerdict::Expansive);
        let b = PresentedAction::principal(p("u1 - 1"));
        assert_eq!(is_expansive_square(&b, None, Exec::default()).unwrap().verdict, ExpansiveVerdict::NotExpansive);
        let r = PresentedAction::new(matrix_from_strs(&[&["1", "0"]]).unwrap());
        assert!(is_expansive_square(&r, None, Exec::default()).is_err());
    }

    #[test]
    fn finiteness_examples() {
        let a = PresentedAction::principal(p("u1 - 2"));
        assert_eq!(has_finite_entropy(&a).verdict, Finiteness::Finite);
        let b = PresentedAction::new(matrix_from_strs(&[&["u1 - 2", "u1 - 2"]]).unwrap());
        let r = has_finite_entropy(&b);
        assert_eq!(r.verdict, Finiteness::Infinite);
        assert_eq!(r.witness.unwrap(), vec![p("1"), p("-1")]);
        assert!(r.witness_verified);
        let c = PresentedAction::new(matrix_from_strs(&[&["2 - u1", "0"], &["0", "2 - u1^2"]]).unwrap());
        assert_eq!(has_finite_entropy(&c).verdict, Finiteness::Finite);
    }
}
