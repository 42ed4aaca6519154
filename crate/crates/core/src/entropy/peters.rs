//! Counting `|sum_{i<n} M^{-i} E|` on `Z^k` with `u` acting by a companion
//! matrix.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::{EntropyEstimate, EntropyMethod, SeriesPoint};
use crate::caps::memory_cap_bytes;
use crate::error::{Error, Result};
use crate::groupring::{GroupRingElement, GroupRingMatrix};

type IntMatrix = Vec<Vec<i64>>;

/// `Z[u, u^-1]/(f)` as `Z^k` in the basis `1, u, ..., u^{k-1}`, with `M`
/// the matrix of multiplication by `u` acting on column vectors.
///
/// A module built with [`CompanionModule::rational`] has no integral
/// inverse; counting then runs on `T_n = M^{n-1} S_n`, which has the same
/// size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompanionModule {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<GroupRingElement>,
    pub m: IntMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_inv: Option<IntMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountingRoute {
    /// `S_{n+1} = S_n + M^{-n} E`.
    Direct,
    /// `T_{n+1} = M T_n + E`.
    Recurrence,
}

impl CompanionModule {
    /// Companion module of a univariate `f` with leading coefficient and
    /// constant term in `{1, -1}`. A monomial factor is stripped first.
    pub fn new(f: &GroupRingElement) -> Result<Self> {
        if f.dim() != 1 {
            return Err(Error::InvalidModule("companion modules need a univariate polynomial".into()));
        }
        if f.is_zero() {
            return Err(Error::InvalidModule("f = 0".into()));
        }
        let lo = f.terms().next().map(|(e, _)| e[0]).expect("nonzero");
        let g = f.shift(&[-lo]);
        let k = g.terms().last().map(|(e, _)| e[0]).expect("nonzero") as usize;
        if k == 0 {
            return Err(Error::InvalidModule("f is a unit; the module is trivial".into()));
        }
        let lead = g.coefficient(&[k as i64]);
        let g = if lead == BigInt::from(-1) {
            -&g
        } else if lead == BigInt::from(1) {
            g
        } else {
            return Err(Error::InvalidModule(format!("leading coefficient {lead} is not +-1")));
        };
        let coef = |i: usize| -> Result<i64> {
            g.coefficient(&[i as i64]).to_i64().ok_or(Error::Overflow("companion coefficient"))
        };
        let c0 = coef(0)?;
        if c0.abs() != 1 {
            return Err(Error::ConstantNotUnit);
        }
        let mut m = vec![vec![0i64; k]; k];
        let mut m_inv = vec![vec![0i64; k]; k];
        // M e_i = e_{i+1}, M e_{k-1} = -sum c_i e_i
        for i in 0..k {
            if i + 1 < k {
                m[i + 1][i] = 1;
            }
            m[i][k - 1] = -coef(i)?;
        }
        // u^{-1} = -(1/c0)(u^{k-1} + c_{k-1} u^{k-2} + ... + c_1)
        for i in 1..k {
            m_inv[i - 1][i] = 1;
        }
        for r in 0..k {
            let c = if r + 1 == k { 1 } else { coef(r + 1)? };
            m_inv[r][0] = -c * c0; // 1/c0 = c0 for a unit
        }
        debug_assert_eq!(mat_mul(&m, &m_inv)?, identity(k));
        Ok(Self { f: Some(g), m, m_inv: Some(m_inv) })
    }

    /// A module given by an integer matrix that is only invertible over `Q`.
    pub fn rational(m: IntMatrix) -> Result<Self> {
        let k = m.len();
        if k == 0 || m.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidModule("M must be a nonempty square matrix".into()));
        }
        let rows = m.iter().map(|r| r.iter().map(|&v| GroupRingElement::constant(1, v)).collect()).collect();
        let det = GroupRingMatrix::from_rows(rows)?.determinant()?;
        if det.is_zero() {
            return Err(Error::InvalidModule("M is singular".into()));
        }
        let m_inv = if det.is_one() || (-&det).is_one() { Some(integer_inverse(&m, &det)?) } else { None };
        Ok(Self { f: None, m, m_inv })
    }

    pub fn rank(&self) -> usize {
        self.m.len()
    }

    pub fn route(&self) -> CountingRoute {
        if self.m_inv.is_some() {
            CountingRoute::Direct
        } else {
            CountingRoute::Recurrence
        }
    }
}

fn identity(k: usize) -> IntMatrix {
    (0..k).map(|i| (0..k).map(|j| i64::from(i == j)).collect()).collect()
}

fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix> {
    let k = a.len();
    let mut out = vec![vec![0i64; k]; k];
    for i in 0..k {
        for j in 0..k {
            let mut s = 0i64;
            for l in 0..k {
                s = a[i][l].checked_mul(b[l][j]).and_then(|p| s.checked_add(p)).ok_or(Error::Overflow("matrix power"))?;
            }
            out[i][j] = s;
        }
    }
    Ok(out)
}

fn mat_vec(a: &IntMatrix, v: &[i64]) -> Result<Vec<i64>> {
    a.iter()
        .map(|row| {
            row.iter().zip(v).try_fold(0i64, |s, (x, y)| x.checked_mul(*y).and_then(|p| s.checked_add(p)))
        })
        .collect::<Option<Vec<_>>>()
        .ok_or(Error::Overflow("matrix-vector product"))
}

fn add_vec(a: &[i64], b: &[i64]) -> Result<Box<[i64]>> {
    a.iter().zip(b).map(|(x, y)| x.checked_add(*y)).collect::<Option<Box<[i64]>>>().ok_or(Error::Overflow("set sum"))
}

/// Inverse of a unimodular matrix via its adjugate.
fn integer_inverse(m: &IntMatrix, det: &GroupRingElement) -> Result<IntMatrix> {
    let k = m.len();
    let rows = m.iter().map(|r| r.iter().map(|&v| GroupRingElement::constant(1, v)).collect()).collect();
    let adj = GroupRingMatrix::from_rows(rows)?.adjugate()?;
    let sign = det.coefficient(&[0]).to_i64().expect("unit");
    let mut out = vec![vec![0i64; k]; k];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = adj.get(i, j).coefficient(&[0]).to_i64().ok_or(Error::Overflow("adjugate"))? * sign;
        }
    }
    Ok(out)
}

/// Sizes `|S_1|, ..., |S_n|` and whether the memory cap cut the run short.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRun {
    pub sizes: Vec<u64>,
    pub partial: bool,
}

fn entry_bytes(k: usize) -> u64 {
    // boxed slice with allocator overhead, plus the table slot at the
    // worst load factor
    8 * k as u64 + 64
}

fn validate_seed(k: usize, seed: &[Vec<i64>]) -> Result<()> {
    if seed.is_empty() || seed.iter().any(|b| b.len() != k) {
        return Err(Error::InvalidParameter(format!("seed vectors must be nonempty and of length {k}")));
    }
    if !seed.iter().any(|b| b.iter().all(|&v| v == 0)) {
        return Err(Error::InvalidParameter("seed set must contain 0".into()));
    }
    Ok(())
}

fn count<F>(k: usize, seed: &[Vec<i64>], n_max: usize, cap_bytes: u64, mut step: F) -> Result<CountRun>
where
    F: FnMut(usize, &HashSet<Box<[i64]>>) -> Result<HashSet<Box<[i64]>>>,
{
    validate_seed(k, seed)?;
    let cap_entries = cap_bytes / entry_bytes(k);
    let mut set: HashSet<Box<[i64]>> = seed.iter().map(|b| b.clone().into_boxed_slice()).collect();
    let mut sizes = vec![set.len() as u64];
    for n in 1..n_max {
        // the next set has at most |S| |E| elements, and the current one
        // stays alive while it is built
        let bound = (set.len() as u64).saturating_mul(seed.len() as u64 + 1);
        if bound > cap_entries {
            return Ok(CountRun { sizes, partial: true });
        }
        set = step(n, &set)?;
        sizes.push(set.len() as u64);
    }
    Ok(CountRun { sizes, partial: false })
}

/// `S_{n+1} = S_n + M^{-n} E`, which needs the integral inverse.
pub fn peters_counts_direct(m_inv: &IntMatrix, seed: &[Vec<i64>], n_max: usize) -> Result<CountRun> {
    direct_with_cap(m_inv, seed, n_max, memory_cap_bytes())
}

fn direct_with_cap(m_inv: &IntMatrix, seed: &[Vec<i64>], n_max: usize, cap_bytes: u64) -> Result<CountRun> {
    let k = m_inv.len();
    let mut power = identity(k);
    count(k, seed, n_max, cap_bytes, |_, set| {
        power = mat_mul(&power, m_inv)?;
        let shifted: Vec<Vec<i64>> = seed.iter().map(|b| mat_vec(&power, b)).collect::<Result<_>>()?;
        let mut next = HashSet::with_capacity(set.len() * 2);
        for s in set {
            for b in &shifted {
                next.insert(add_vec(s, b)?);
            }
        }
        Ok(next)
    })
}

/// `T_{n+1} = M T_n + E`, with `T_n = M^{n-1} S_n`.
pub fn peters_counts_recurrence(m: &IntMatrix, seed: &[Vec<i64>], n_max: usize) -> Result<CountRun> {
    let k = m.len();
    count(k, seed, n_max, memory_cap_bytes(), |_, set| {
        let mut next = HashSet::with_capacity(set.len() * 2);
        for t in set {
            let mt = mat_vec(m, t)?;
            for b in seed {
                next.insert(add_vec(&mt, b)?);
            }
        }
        Ok(next)
    })
}

/// Growth rate of `|S_n|`, estimated by the mean of the last five
/// successive differences of `log |S_n|`. The default seed is `{0, e_1}`.
pub fn peters_entropy(cm: &CompanionModule, seed: Option<&[Vec<i64>]>, n_max: usize) -> Result<EntropyEstimate> {
    let k = cm.rank();
    if n_max < 2 {
        return Err(Error::InvalidParameter("n_max must be at least 2".into()));
    }
    let default_seed;
    let seed = match seed {
        Some(s) => s,
        None => {
            let mut e1 = vec![0i64; k];
            e1[0] = 1;
            default_seed = vec![vec![0i64; k], e1];
            &default_seed
        }
    };
    let run = match &cm.m_inv {
        Some(inv) => peters_counts_direct(inv, seed, n_max)?,
        None => peters_counts_recurrence(&cm.m, seed, n_max)?,
    };
    let series: Vec<SeriesPoint> = run
        .sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| {
            let log_size = (size as f64).ln();
            let diff = (i > 0).then(|| log_size - (run.sizes[i - 1] as f64).ln());
            SeriesPoint { n: i + 1, size, log_size, diff }
        })
        .collect();
    let diffs: Vec<f64> = series.iter().filter_map(|p| p.diff).collect();
    let tail = &diffs[diffs.len().saturating_sub(5)..];
    let value = if tail.is_empty() { 0.0 } else { tail.iter().sum::<f64>() / tail.len() as f64 };
    let mut est = EntropyEstimate::new(EntropyMethod::PetersCounting, value);
    est.param("n_max", n_max);
    est.param("n_reached", run.sizes.len());
    est.param("rank", k);
    est.param("route", serde_json::to_value(cm.route()).expect("route"));
    est.param("seed", serde_json::to_value(seed).expect("seed"));
    if let Some(f) = &cm.f {
        est.param("f", f.to_string());
    }
    if tail.len() >= 2 {
        let mean = value;
        est.error_estimate = Some(tail.iter().map(|d| (d - mean).abs()).fold(0.0, f64::max));
    }
    if run.partial {
        est.partial = true;
        est.flags.push(format!("memory cap reached after n = {}", run.sizes.len()));
    }
    est.series = series;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> GroupRingElement {
        s.parse().unwrap()
    }

    #[test]
    fn companion_inverse_is_exact() {
        for f in ["u1^2 - u1 - 1", "u1^3 - 2 u1 + 1", "-u1^2 + 3u1 - 1", "u1 - 1", "u1^5 + u1^4 - u1^2 + 7u1 - 1"] {
            let cm = CompanionModule::new(&p(f)).unwrap();
            let k = cm.rank();
            assert_eq!(mat_mul(&cm.m, cm.m_inv.as_ref().unwrap()).unwrap(), identity(k), "{f}");
        }
    }

    #[test]
    fn companion_errors() {
        assert!(matches!(CompanionModule::new(&p("u1 - 2")), Err(Error::ConstantNotUnit)));
        assert!(matches!(CompanionModule::new(&p("2 u1 - 1")), Err(Error::InvalidModule(_))));
        assert!(CompanionModule::new(&p("u1 u2 - 1")).is_err());
        // a monomial factor is harmless
        let cm = CompanionModule::new(&p("u1^3 - u1^2 - u1")).unwrap();
        assert_eq!(cm.rank(), 2);
    }

    #[test]
    fn trivial_counts() {
        let cm = CompanionModule::new(&p("u1 - 1")).unwrap();
        let est = peters_entropy(&cm, None, 20).unwrap();
        for pt in &est.series {
            assert_eq!(pt.size, pt.n as u64 + 1);
        }
        let two = CompanionModule::rational(vec![vec![2]]).unwrap();
        assert!(two.m_inv.is_none());
        let est = peters_entropy(&two, None, 20).unwrap();
        for pt in &est.series {
            assert_eq!(pt.size, 1u64 << pt.n);
        }
        assert!((est.value - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn routes_agree() {
        let cm = CompanionModule::new(&p("u1^2 - u1 - 1")).unwrap();
        let seed = vec![vec![0, 0], vec![1, 0], vec![0, 1]];
        let a = peters_counts_direct(cm.m_inv.as_ref().unwrap(), &seed, 12).unwrap();
        let b = peters_counts_recurrence(&cm.m, &seed, 12).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unimodular_rational_input_gets_inverse() {
        let cm = CompanionModule::rational(vec![vec![2, 1], vec![1, 1]]).unwrap();
        let inv = cm.m_inv.as_ref().unwrap();
        assert_eq!(mat_mul(&cm.m, inv).unwrap(), identity(2));
        assert!(CompanionModule::rational(vec![vec![1, 2], vec![2, 4]]).is_err());
    }

    #[test]
    fn memory_cap_truncates_the_series() {
        let cm = CompanionModule::new(&p("u1^2 - u1 - 1")).unwrap();
        let run = direct_with_cap(cm.m_inv.as_ref().unwrap(), &[vec![0, 0], vec![1, 0]], 40, 1 << 20).unwrap();
        assert!(run.partial);
        assert!(run.sizes.len() < 40);
        // the last completed step was admitted by the cap, the next one was not
        let cap_entries = (1u64 << 20) / entry_bytes(2);
        let n = run.sizes.len();
        assert!(run.sizes[n - 2] * 3 <= cap_entries);
        assert!(run.sizes[n - 1] * 3 > cap_entries);
    }

    #[test]
    fn seed_must_contain_zero() {
        let cm = CompanionModule::new(&p("u1 - 1")).unwrap();
        assert!(peters_entropy(&cm, Some(&[vec![1], vec![2]]), 5).is_err());
    }
}
