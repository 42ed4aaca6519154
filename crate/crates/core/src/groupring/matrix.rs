use std::fmt;

use num_bigint::BigInt;

use super::GroupRingElement;
use crate::caps::MAX_POLY_TERMS;
use crate::error::{Error, Result};

/// A rectangular matrix over `Z[Z^d]`, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupRingMatrix {
    rows: usize,
    cols: usize,
    d: usize,
    entries: Vec<GroupRingElement>,
}

/// Result of fraction-free elimination: rank, pivot positions and the row
/// permutation that brought the pivot rows to the top.
#[derive(Debug, Clone)]
pub struct RankProfile {
    pub rank: usize,
    /// Original row indices of the pivot rows, in elimination order.
    pub pivot_rows: Vec<usize>,
    /// Pivot columns, increasing.
    pub pivot_cols: Vec<usize>,
    /// Last pivot (an `rank x rank` minor), one for rank 0.
    pub last_pivot: GroupRingElement,
    pub sign: i32,
}

impl GroupRingMatrix {
    pub fn from_rows(rows: Vec<Vec<GroupRingElement>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::ShapeMismatch("matrix needs at least one row".into()));
        }
        let k = rows[0].len();
        if k == 0 {
            return Err(Error::ShapeMismatch("matrix needs at least one column".into()));
        }
        let d = rows[0][0].dim();
        let mut entries = Vec::with_capacity(n * k);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != k {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} entries, expected {k}",
                    row.len()
                )));
            }
            for e in row {
                if e.dim() != d {
                    return Err(Error::DimensionMismatch { left: d, right: e.dim() });
                }
                entries.push(e);
            }
        }
        Ok(Self { rows: n, cols: k, d, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, d: usize, f: impl Fn(usize, usize) -> GroupRingElement) -> Self {
        assert!(rows > 0 && cols > 0 && d > 0);
        let entries = (0..rows * cols).map(|idx| f(idx / cols, idx % cols)).collect::<Vec<_>>();
        assert!(entries.iter().all(|e| e.dim() == d));
        Self { rows, cols, d, entries }
    }

    /// The `1 x 1` matrix `[f]`.
    pub fn scalar(f: GroupRingElement) -> Self {
        Self { rows: 1, cols: 1, d: f.dim(), entries: vec![f] }
    }

    pub fn identity(k: usize, d: usize) -> Self {
        Self::from_fn(k, k, d, |i, j| if i == j { GroupRingElement::one(d) } else { GroupRingElement::zero(d) })
    }

    pub fn diagonal(diag: Vec<GroupRingElement>) -> Result<Self> {
        let k = diag.len();
        if k == 0 {
            return Err(Error::ShapeMismatch("empty diagonal".into()));
        }
        let d = diag[0].dim();
        let rows = (0..k)
            .map(|i| (0..k).map(|j| if i == j { diag[i].clone() } else { GroupRingElement::zero(d) }).collect())
            .collect();
        Self::from_rows(rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &GroupRingElement {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[GroupRingElement] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[GroupRingElement] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.d, |i, j| self.get(j, i).clone())
    }

    /// `A* = (a*_{j,i})`: transpose combined with the entrywise involution.
    pub fn involution(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.d, |i, j| self.get(j, i).involution())
    }

    /// Entrywise involution without transposing.
    pub fn conjugate(&self) -> Self {
        Self::from_fn(self.rows, self.cols, self.d, |i, j| self.get(i, j).involution())
    }

    /// `||A||_1 = sum_{i,j} ||a_{ij}||_1`.
    pub fn l1_norm(&self) -> BigInt {
        self.entries.iter().map(|e| e.l1_norm()).sum()
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { left: self.d, right: other.d });
        }
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.cols, self.d, |i, j| {
            (0..self.cols).fold(GroupRingElement::zero(self.d), |acc, l| &acc + &(self.get(i, l) * other.get(l, j)))
        }))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { left: self.d, right: other.d });
        }
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::ShapeMismatch("cannot add matrices of different shapes".into()));
        }
        Ok(Self::from_fn(self.rows, self.cols, self.d, |i, j| self.get(i, j) + other.get(i, j)))
    }

    /// Row vector times matrix: `(a A)_j = sum_i a_i A_{ij}`.
    pub fn left_mul_row(&self, a: &[GroupRingElement]) -> Result<Vec<GroupRingElement>> {
        if a.len() != self.rows {
            return Err(Error::ShapeMismatch(format!(
                "row vector of length {} against {} rows",
                a.len(),
                self.rows
            )));
        }
        for x in a {
            if x.dim() != self.d {
                return Err(Error::DimensionMismatch { left: self.d, right: x.dim() });
            }
        }
        Ok((0..self.cols)
            .map(|j| (0..self.rows).fold(GroupRingElement::zero(self.d), |acc, i| &acc + &(&a[i] * self.get(i, j))))
            .collect())
    }

    /// Submatrix on the given rows and columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), self.d, |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// Fraction-free (Bareiss) elimination with column skipping.
    ///
    /// After the step with pivot `(r, c)` every remaining entry `(i, j)` equals
    /// the minor on rows `pivot_rows + {i}` and columns `pivot_cols + {j}`, so
    /// each division by the previous pivot is exact in `Z[Z^d]`.
    pub fn rank_profile(&self) -> Result<RankProfile> {
        let (n, k) = (self.rows, self.cols);
        let mut m: Vec<Vec<GroupRingElement>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut prev = GroupRingElement::one(self.d);
        let mut sign = 1i32;
        let mut pivot_cols = Vec::new();
        let mut r = 0usize;
        for c in 0..k {
            if r == n {
                break;
            }
            // Prefer the sparsest nonzero pivot to limit expression swell.
            let Some(p) = (r..n).filter(|&i| !m[i][c].is_zero()).min_by_key(|&i| m[i][c].len()) else {
                continue;
            };
            if p != r {
                m.swap(p, r);
                perm.swap(p, r);
                sign = -sign;
            }
            for i in r + 1..n {
                for j in c + 1..k {
                    let num = &(&m[r][c] * &m[i][j]) - &(&m[i][c] * &m[r][j]);
                    if num.len() > MAX_POLY_TERMS {
                        return Err(Error::ExpressionSwell { terms: num.len(), cap: MAX_POLY_TERMS });
                    }
                    m[i][j] = num.exact_div(&prev)?.ok_or_else(|| {
                        Error::InvalidModule("fraction-free elimination produced an inexact quotient".into())
                    })?;
                }
                m[i][c] = GroupRingElement::zero(self.d);
            }
            prev = m[r][c].clone();
            pivot_cols.push(c);
            r += 1;
        }
        Ok(RankProfile { rank: r, pivot_rows: perm[..r].to_vec(), pivot_cols, last_pivot: prev, sign })
    }

    /// Exact determinant by fraction-free elimination.
    pub fn determinant(&self) -> Result<GroupRingElement> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch("determinant of a non-square matrix".into()));
        }
        let profile = self.rank_profile()?;
        if profile.rank < self.rows {
            return Ok(GroupRingElement::zero(self.d));
        }
        Ok(if profile.sign < 0 { -&profile.last_pivot } else { profile.last_pivot })
    }

    /// Determinant by cofactor expansion along the first row. Exponential in
    /// the size; an independent route used to cross-check [`Self::determinant`].
    pub fn determinant_by_expansion(&self) -> Result<GroupRingElement> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch("determinant of a non-square matrix".into()));
        }
        let idx: Vec<usize> = (0..self.cols).collect();
        Ok(self.expand(&(0..self.rows).collect::<Vec<_>>(), &idx))
    }

    fn expand(&self, rows: &[usize], cols: &[usize]) -> GroupRingElement {
        if rows.len() == 1 {
            return self.get(rows[0], cols[0]).clone();
        }
        let mut acc = GroupRingElement::zero(self.d);
        for (t, &c) in cols.iter().enumerate() {
            let a = self.get(rows[0], c);
            if a.is_zero() {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = a * &self.expand(&rows[1..], &rest);
            acc = if t % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }

    /// Adjugate: `adj(A) A = A adj(A) = det(A) I`.
    pub fn adjugate(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch("adjugate of a non-square matrix".into()));
        }
        let k = self.rows;
        if k == 1 {
            return Ok(Self::identity(1, self.d));
        }
        let mut entries = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                // adj_{ij} = (-1)^{i+j} det(A without row j, column i)
                let rows: Vec<usize> = (0..k).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..k).filter(|&c| c != i).collect();
                let minor = self.submatrix(&rows, &cols).determinant()?;
                entries.push(if (i + j) % 2 == 0 { minor } else { -&minor });
            }
        }
        Ok(Self { rows: k, cols: k, d: self.d, entries })
    }

    /// A nonzero vector `v` with `A v = 0` (column convention), if the columns
    /// are dependent over the fraction field. Entries are signed maximal
    /// minors, so the vector has coefficients in `Z[Z^d]`.
    pub fn right_kernel_vector(&self) -> Result<Option<Vec<GroupRingElement>>> {
        let profile = self.rank_profile()?;
        if profile.rank == self.cols {
            return Ok(None);
        }
        let free = (0..self.cols).find(|c| !profile.pivot_cols.contains(c)).expect("rank < cols");
        let mut cols = profile.pivot_cols.clone();
        cols.push(free);
        cols.sort_unstable();
        let mut v = vec![GroupRingElement::zero(self.d); self.cols];
        if profile.rank == 0 {
            v[free] = GroupRingElement::one(self.d);
            return Ok(Some(v));
        }
        for (t, &c) in cols.iter().enumerate() {
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let minor = self.submatrix(&profile.pivot_rows, &rest).determinant()?;
            v[c] = if t % 2 == 0 { minor } else { -&minor };
        }
        Ok(Some(v))
    }

    /// Whether every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn max_entry_terms(&self) -> usize {
        self.entries.iter().map(|e| e.len()).max().unwrap_or(0)
    }
}

impl fmt::Display for GroupRingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

impl fmt::Debug for GroupRingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupRingMatrix({}x{}, d={}, {})", self.rows, self.cols, self.d, self)
    }
}

/// Convenience for tests and fixtures: parse a matrix of expression strings.
pub fn matrix_from_strs(rows: &[&[&str]]) -> Result<GroupRingMatrix> {
    let d = rows
        .iter()
        .flat_map(|r| r.iter())
        .map(|s| super::parse::inferred_dim(s))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(1);
    let parsed = rows
        .iter()
        .map(|r| r.iter().map(|s| super::parse::parse_with_dim(s, d)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    GroupRingMatrix::from_rows(parsed)
}

#[allow(dead_code)]
#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> GroupRingElement {
        s.parse().unwrap()
    }

    #[test]
    fn involution_transposes() {
        let a = matrix_from_strs(&[&["u1", "u2^2"]]).unwrap();
        let b = a.involution();
        assert_eq!((b.rows(), b.cols()), (2, 1));
        assert_eq!(b.get(0, 0), &crate::groupring::parse_with_dim("u1^-1", 2).unwrap());
        assert_eq!(b.get(1, 0), &crate::groupring::parse_with_dim("u2^-2", 2).unwrap());
    }

    #[test]
    fn determinants_agree_with_expansion() {
        let a = matrix_from_strs(&[
            &["3 - u1", "1", "u1^2"],
            &["u1^-1", "3 - u1^-1", "2"],
            &["1 + u1", "0", "5 - u1 - u1^-1"],
        ])
        .unwrap();
        assert_eq!(a.determinant().unwrap(), a.determinant_by_expansion().unwrap());
        let b = matrix_from_strs(&[&["3 - u1", "1"], &["0", "3 - u1^-1"]]).unwrap();
        assert_eq!(b.determinant().unwrap(), &p("3 - u1") * &p("3 - u1^-1"));
        let c = matrix_from_strs(&[&["2", "u1"], &["u1^-1", "2"]]).unwrap();
        assert_eq!(c.determinant().unwrap(), p("3"));
        // a zero leading entry forces a row swap
        let s = matrix_from_strs(&[&["0", "u1"], &["1", "0"]]).unwrap();
        assert_eq!(s.determinant().unwrap(), p("-u1"));
    }

    #[test]
    fn singular_determinant_is_zero() {
        let a = matrix_from_strs(&[&["u1 - 2", "u1 - 2"], &["1 + u1", "1 + u1"]]).unwrap();
        assert!(a.determinant().unwrap().is_zero());
        assert_eq!(a.rank_profile().unwrap().rank, 1);
    }

    #[test]
    fn adjugate_identity() {
        let a = matrix_from_strs(&[&["2", "u1"], &["0", "2"]]).unwrap();
        let adj = a.adjugate().unwrap();
        let det = a.determinant().unwrap();
        let prod = adj.checked_mul(&a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { det.clone() } else { GroupRingElement::zero(1) };
                assert_eq!(prod.get(i, j), &expect);
            }
        }
    }

    #[test]
    fn right_kernel_annihilates() {
        let a = matrix_from_strs(&[&["u1 - 2", "u1 - 2"]]).unwrap();
        let v = a.right_kernel_vector().unwrap().unwrap();
        let col: Vec<Vec<GroupRingElement>> = v.iter().map(|x| vec![x.clone()]).collect();
        let prod = a.checked_mul(&GroupRingMatrix::from_rows(col).unwrap()).unwrap();
        assert!(prod.is_zero());
        assert!(v.iter().any(|x| !x.is_zero()));
        let full = matrix_from_strs(&[&["2 - u1", "0"], &["0", "2 - u1^2"]]).unwrap();
        assert!(full.right_kernel_vector().unwrap().is_none());
    }
}
