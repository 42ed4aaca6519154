//! Finite-index subgroups of `Z^d` and reduction onto a fundamental domain.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupring::Exponent;
use crate::window::Window;

/// Upper-triangular Hermite form of the lattice spanned by the rows of
/// `basis`: positive diagonal, entries above the diagonal reduced into
/// `[0, h_jj)`.
pub fn hermite_normal_form(basis: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let d = basis.len();
    if d == 0 || basis.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidParameter("lattice basis must be a nonempty square matrix".into()));
    }
    let mut h: Vec<Vec<i128>> = basis.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    for c in 0..d {
        // Euclid on column c among rows c..d
        loop {
            let pivot = (c..d).filter(|&r| h[r][c] != 0).min_by_key(|&r| h[r][c].abs());
            let Some(p) = pivot else {
                return Err(Error::InvalidParameter("lattice basis is singular".into()));
            };
            h.swap(c, p);
            let mut done = true;
            for r in c + 1..d {
                let q = h[r][c].div_euclid(h[c][c]);
                if q != 0 {
                    for j in c..d {
                        h[r][j] -= q * h[c][j];
                    }
                }
                if h[r][c] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[c][c] < 0 {
            for v in &mut h[c] {
                *v = -*v;
            }
        }
    }
    for c in 0..d {
        for r in 0..c {
            let q = h[r][c].div_euclid(h[c][c]);
            if q != 0 {
                for j in c..d {
                    h[r][j] -= q * h[c][j];
                }
            }
        }
    }
    h.into_iter()
        .map(|r| r.into_iter().map(|v| i64::try_from(v).map_err(|_| Error::Overflow("normal form"))).collect())
        .collect()
}

/// A finite-index subgroup `L` of `Z^d` with the box
/// `D = [0, h_11) x ... x [0, h_dd)` as fundamental domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeriodLattice {
    pub hnf: Vec<Vec<i64>>,
}

impl PeriodLattice {
    pub fn new(basis: &[Vec<i64>]) -> Result<Self> {
        Ok(Self { hnf: hermite_normal_form(basis)? })
    }

    pub fn dim(&self) -> usize {
        self.hnf.len()
    }

    pub fn index(&self) -> u128 {
        self.hnf.iter().enumerate().map(|(i, r)| r[i] as u128).product()
    }

    pub fn domain(&self) -> Window {
        let d = self.dim();
        Window::new(vec![0; d], (0..d).map(|i| self.hnf[i][i] - 1).collect()).expect("positive diagonal")
    }

    /// The representative of `v + L` in the fundamental domain.
    pub fn reduce(&self, v: &[i64]) -> Exponent {
        let mut v = v.to_vec();
        for (i, row) in self.hnf.iter().enumerate() {
            let q = v[i].div_euclid(row[i]);
            if q != 0 {
                for j in i..v.len() {
                    v[j] -= q * row[j];
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.reduce(v).iter().all(|&c| c == 0)
    }
}
