//! Truncated `l^1` inverses with exact residual certificates.
//!
//! The initial guess samples `1/f^` on a grid and transforms back; it is
//! then refined by Newton steps `g <- g + g (delta - f g)` in double
//! precision, re-truncating to the box of radius `R` each time. The
//! residual of the final `g` is computed exactly, so the floating-point
//! refinement never enters the certificate.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{folded_index, grid_points, grid_values, transform};
use super::{certify_invertible_default, L1Approximant, Verdict};
use crate::caps::max_grid_points;
use crate::error::{Error, Result};
use crate::exact::{matrix_residual, scalar_residual, ExactResidual};
use crate::groupring::{Exponent, GroupRingElement, GroupRingMatrix};
use crate::par::Exec;

/// Coefficients below this magnitude are dropped from approximants.
const FLUSH: f64 = 1e-200;

/// Maximum number of Newton steps per radius.
const NEWTON_STEPS: usize = 6;

/// A real function on the box `[-r, r]^d`, row-major.
#[derive(Clone)]
struct DenseBox {
    d: usize,
    r: i64,
    data: Vec<f64>,
}

impl DenseBox {
    fn zeros(d: usize, r: i64) -> Self {
        let w = (2 * r + 1) as usize;
        Self { d, r, data: vec![0.0; w.pow(d as u32)] }
    }

    fn width(&self) -> usize {
        (2 * self.r + 1) as usize
    }

    fn index(&self, e: &[i64]) -> Option<usize> {
        let w = self.width();
        let mut idx = 0usize;
        for &x in e {
            if x.abs() > self.r {
                return None;
            }
            idx = idx * w + (x + self.r) as usize;
        }
        Some(idx)
    }

    fn exponent(&self, mut idx: usize) -> Exponent {
        let w = self.width();
        let mut e = vec![0i64; self.d];
        for i in (0..self.d).rev() {
            e[i] = (idx % w) as i64 - self.r;
            idx /= w;
        }
        e
    }

    fn from_map(d: usize, r: i64, map: &BTreeMap<Exponent, f64>) -> Self {
        let mut out = Self::zeros(d, r);
        for (e, c) in map {
            if let Some(i) = out.index(e) {
                out.data[i] = *c;
            }
        }
        out
    }

    fn to_map(&self) -> BTreeMap<Exponent, f64> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > FLUSH)
            .map(|(i, &c)| (self.exponent(i), c))
            .collect()
    }

    fn truncate(&self, r: i64) -> Self {
        let mut out = Self::zeros(self.d, r);
        for (i, &c) in self.data.iter().enumerate() {
            if c != 0.0 {
                if let Some(j) = out.index(&self.exponent(i)) {
                    out.data[j] = c;
                }
            }
        }
        out
    }

    fn add(&mut self, other: &Self) {
        for (i, &c) in other.data.iter().enumerate() {
            if c != 0.0 {
                let j = self.index(&other.exponent(i)).expect("contained box");
                self.data[j] += c;
            }
        }
    }

    fn l1(&self) -> f64 {
        self.data.iter().map(|c| c.abs()).sum()
    }
}

/// `f * g` for integer `f`, kept in full (radius `g.r + supp f`).
fn mul_int(f: &GroupRingElement, g: &DenseBox, exec: Exec) -> DenseBox {
    let s = f.support_radius();
    let mut out = DenseBox::zeros(g.d, g.r + s);
    let terms = f.float_terms();
    let w = out.width();
    let cells = out.data.len();
    let template = out.clone();
    out.data = exec.map_range(cells, |i| {
        let t = template.exponent(i);
        let mut acc = 0.0;
        for (n, c) in &terms {
            let u: Vec<i64> = t.iter().zip(n).map(|(a, b)| a - b).collect();
            if let Some(j) = g.index(&u) {
                acc += c * g.data[j];
            }
        }
        acc
    });
    debug_assert_eq!(w, out.width());
    out
}

/// Full convolution of two boxes via a zero-padded FFT.
fn convolve(a: &DenseBox, b: &DenseBox, exec: Exec) -> Result<DenseBox> {
    let d = a.d;
    let r = a.r + b.r;
    let q = ((2 * r + 1) as usize).next_power_of_two();
    let n = grid_points(q, d)?;
    let load = |x: &DenseBox| {
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (i, &c) in x.data.iter().enumerate() {
            if c != 0.0 {
                buf[folded_index(&x.exponent(i), q)] = Complex64::new(c, 0.0);
            }
        }
        buf
    };
    let mut fa = load(a);
    let mut fb = load(b);
    transform(&mut fa, q, d, false, exec);
    transform(&mut fb, q, d, false, exec);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    transform(&mut fa, q, d, true, exec);
    let scale = 1.0 / n as f64;
    let mut out = DenseBox::zeros(d, r);
    for i in 0..out.data.len() {
        out.data[i] = fa[folded_index(&out.exponent(i), q)].re * scale;
    }
    Ok(out)
}

/// `delta_e - f g` in full.
fn defect(f: &GroupRingElement, g: &DenseBox, exec: Exec) -> DenseBox {
    let mut e = mul_int(f, g, exec);
    for c in &mut e.data {
        *c = -*c;
    }
    let zero = e.index(&vec![0; g.d]).expect("origin");
    e.data[zero] += 1.0;
    e
}

/// Sample `1/f^` on a grid and transform back: coefficients of an
/// approximate inverse, aliased with period `p`.
fn sampled_inverse(f: &GroupRingElement, radius: i64, exec: Exec) -> Result<DenseBox> {
    let d = f.dim();
    let mut p = ((4 * (radius + f.support_radius()) + 8) as usize).next_power_of_two().max(64);
    while (p as u128).pow(d as u32) > max_grid_points() && p > (2 * radius + 2) as usize {
        p /= 2;
    }
    let mut vals = grid_values(f, p, false, exec)?;
    for v in &mut vals {
        *v = v.inv();
    }
    transform(&mut vals, p, d, false, exec);
    let scale = 1.0 / vals.len() as f64;
    let mut out = DenseBox::zeros(d, radius);
    for i in 0..out.data.len() {
        out.data[i] = vals[folded_index(&out.exponent(i), p)].re * scale;
    }
    Ok(out)
}

fn radius_schedule(cap: usize) -> Vec<i64> {
    let cap = cap.max(1) as i64;
    let mut r = cap.min(4);
    let mut out = vec![r];
    while r < cap {
        r = (2 * r).min(cap);
        out.push(r);
    }
    out
}

/// `r ||g||_1 / (1 - r)` rounded up, the a posteriori bound on
/// `||f^{-1} - g||_1`.
fn tail_from_residual(r: f64, g_norm: f64) -> Option<f64> {
    if r >= 1.0 {
        return None;
    }
    if r == 0.0 {
        return Some(0.0);
    }
    let v = (r * g_norm).next_up() / (1.0 - r).next_down();
    Some(v.next_up())
}

fn monomial_inverse(f: &GroupRingElement) -> Option<L1Approximant> {
    if f.len() != 1 {
        return None;
    }
    let (e, c) = f.terms().next()?;
    let inv = 1.0 / num_traits::ToPrimitive::to_f64(c)?;
    let terms: BTreeMap<Exponent, f64> = [(e.iter().map(|x| -x).collect(), inv)].into_iter().collect();
    let mut g = L1Approximant::exact(f.dim(), terms);
    let r = scalar_residual(&g.terms, f);
    g.tail_bound = tail_from_residual(r.value, g.l1_norm());
    g.residual = Some(r);
    Some(g)
}

/// Inverse of `f` in `l^1(Z^d)` to exact residual `<= tol`, assuming `f^`
/// has already been certified nonvanishing.
pub fn l1_inverse_certified(f: &GroupRingElement, tol: f64, radius_cap: usize, exec: Exec) -> Result<L1Approximant> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    if let Some(g) = monomial_inverse(f) {
        return Ok(g);
    }
    let d = f.dim();
    let schedule = radius_schedule(radius_cap);
    let cap_r = *schedule.last().expect("nonempty schedule");
    let initial = sampled_inverse(f, cap_r, exec)?;
    let mut best = f64::INFINITY;
    for &r in &schedule {
        let mut g = initial.truncate(r);
        let mut err = defect(f, &g, exec).l1();
        for _ in 0..NEWTON_STEPS {
            let e = defect(f, &g, exec);
            let mut next = g.clone();
            next.add(&convolve(&g, &e, exec)?.truncate(r));
            let err_next = defect(f, &next, exec).l1();
            let improved = err_next < 0.5 * err;
            if err_next < err {
                g = next;
                err = err_next;
            }
            if !improved {
                break;
            }
        }
        let terms = g.to_map();
        let residual = scalar_residual(&terms, f);
        best = best.min(residual.value);
        if residual.le_f64(tol) && residual.value < 1.0 {
            let mut out = L1Approximant { d, terms, tail_bound: None, residual: None, radius: r };
            out.tail_bound = tail_from_residual(residual.value, out.l1_norm());
            out.residual = Some(residual);
            return Ok(out);
        }
    }
    Err(Error::ToleranceUnreachable { tol, radius_cap, best })
}

/// Certifies `f` at the default grid, then inverts it.
pub fn l1_inverse(f: &GroupRingElement, tol: f64, radius_cap: usize, exec: Exec) -> Result<L1Approximant> {
    let cert = certify_invertible_default(f, exec)?;
    match cert.verdict {
        Verdict::Invertible => l1_inverse_certified(f, tol, radius_cap, exec),
        Verdict::NotInvertible => Err(Error::NotInvertible(format!("{f} vanishes at {:?}", cert.witness.unwrap_or_default()))),
        Verdict::Unknown => Err(Error::NotCertified),
    }
}

/// Approximate inverse `G` of a square matrix with exact residual
/// `||I - G A||_1` (sum of the entry norms).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixL1Inverse {
    pub k: usize,
    pub d: usize,
    /// Row-major entries of `G`.
    pub entries: Vec<L1Approximant>,
    pub residual: ExactResidual,
    /// Bound on `||A^{-1} - G||_1`, `r ||G||_1 / (1 - r)`.
    pub tail_bound: f64,
    pub determinant: String,
}

impl MatrixL1Inverse {
    pub fn get(&self, i: usize, j: usize) -> &L1Approximant {
        &self.entries[i * self.k + j]
    }

    pub fn l1_norm(&self) -> f64 {
        crate::exact::exact_l1(self.entries.iter().flat_map(|e| e.terms.values().copied())).value
    }

    /// `l^1` mass of all entries outside the ball of radius `r`.
    pub fn l1_outside(&self, r: i64) -> f64 {
        crate::exact::exact_l1(
            self.entries
                .iter()
                .flat_map(|e| e.terms.iter().filter(|(x, _)| crate::window::sup_norm(x) > r).map(|(_, c)| *c)),
        )
        .value
    }

    pub fn radius(&self) -> i64 {
        self.entries.iter().map(|e| e.radius).max().unwrap_or(0)
    }
}

fn finish_matrix(k: usize, d: usize, boxes: &[DenseBox], a: &GroupRingMatrix, det: &GroupRingElement) -> MatrixL1Inverse {
    let maps: Vec<BTreeMap<Exponent, f64>> = boxes.iter().map(|b| b.to_map()).collect();
    let refs: Vec<&BTreeMap<Exponent, f64>> = maps.iter().collect();
    let residual = matrix_residual(k, d, &refs, a.entries());
    let norm = crate::exact::exact_l1(maps.iter().flat_map(|m| m.values().copied())).value;
    let tail = tail_from_residual(residual.value, norm).unwrap_or(f64::INFINITY);
    let entries = maps
        .into_iter()
        .zip(boxes)
        .map(|(terms, b)| L1Approximant { d, terms, tail_bound: Some(tail), residual: None, radius: b.r })
        .collect();
    MatrixL1Inverse { k, d, entries, residual, tail_bound: tail, determinant: det.to_string() }
}

/// Inverse of a square matrix in `M_k(l^1(Z^d))` as `adj(A) det(A)^{-1}`,
/// refined by matrix Newton steps if needed.
pub fn matrix_l1_inverse(a: &GroupRingMatrix, tol: f64, radius_cap: usize, exec: Exec) -> Result<MatrixL1Inverse> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch("matrix must be square".into()));
    }
    let (k, d) = (a.rows(), a.dim());
    let det = a.determinant()?;
    let cert = certify_invertible_default(&det, exec)?;
    match cert.verdict {
        Verdict::Invertible => {}
        Verdict::NotInvertible => {
            return Err(Error::NotInvertible(format!("det = {det} vanishes at {:?}", cert.witness.unwrap_or_default())))
        }
        Verdict::Unknown => return Err(Error::NotCertified),
    }
    let adj = a.adjugate()?;
    let adj_norm: f64 = adj.entries().iter().map(|e| e.l1_norm_f64()).sum::<f64>().max(1.0);
    let h = l1_inverse_certified(&det, (tol / (4.0 * k as f64 * adj_norm)).max(1e-300), radius_cap, exec)?;
    let hbox = DenseBox::from_map(d, h.radius, &h.terms);
    let mut boxes: Vec<DenseBox> = adj.entries().iter().map(|e| mul_int(e, &hbox, exec)).collect();
    let r_g = boxes.iter().map(|b| b.r).max().unwrap_or(0);
    boxes = boxes.into_iter().map(|b| b.truncate(r_g)).collect();
    let mut out = finish_matrix(k, d, &boxes, a, &det);
    let mut attempts = 0;
    while !out.residual.le_f64(tol) && attempts < 3 {
        attempts += 1;
        // G <- G + (I - G A) G
        let mut e: Vec<DenseBox> = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                let mut acc = DenseBox::zeros(d, r_g + a.entries().iter().map(|x| x.support_radius()).max().unwrap_or(0));
                if i == j {
                    let z = acc.index(&vec![0; d]).expect("origin");
                    acc.data[z] = 1.0;
                }
                for l in 0..k {
                    let mut prod = mul_int(a.get(l, j), &boxes[i * k + l], exec);
                    for c in &mut prod.data {
                        *c = -*c;
                    }
                    acc.add(&prod.truncate(acc.r));
                }
                e.push(acc);
            }
        }
        let mut next = boxes.clone();
        for i in 0..k {
            for j in 0..k {
                for l in 0..k {
                    let c = convolve(&e[i * k + l], &boxes[l * k + j], exec)?.truncate(r_g);
                    next[i * k + j].add(&c);
                }
            }
        }
        let cand = finish_matrix(k, d, &next, a, &det);
        if cand.residual.value >= out.residual.value {
            break;
        }
        boxes = next;
        out = cand;
    }
    if !out.residual.le_f64(tol) {
        return Err(Error::ToleranceUnreachable { tol, radius_cap, best: out.residual.value });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupring::matrix_from_strs;

    fn p(s: &str) -> GroupRingElement {
        s.parse().unwrap()
    }

    #[test]
    fn inverse_of_u_minus_two() {
        let g = l1_inverse(&p("u1 - 2"), 1e-12, 64, Exec::default()).unwrap();
        for n in 0..20 {
            let expect = -(0.5f64).powi(n as i32 + 1);
            assert!((g.coefficient(&[n]) - expect).abs() < 1e-13, "n = {n}");
            assert!(g.coefficient(&[-n - 1]).abs() < 1e-13);
        }
        assert!(g.residual.as_ref().unwrap().le_f64(1e-12));
    }

    #[test]
    fn inverse_of_three_minus_u_minus_u_inv() {
        let g = l1_inverse(&p("3 - u1 - u1^-1"), 1e-10, 40, Exec::default()).unwrap();
        let r = (3.0 - 5f64.sqrt()) / 2.0;
        for n in -10i64..=10 {
            let expect = r.powi(n.abs() as i32) / 5f64.sqrt();
            assert!((g.coefficient(&[n]) - expect).abs() < 1e-12);
        }
        assert!(g.tail_bound.unwrap() < 1e-9);
    }

    #[test]
    fn inverse_of_one_is_exact() {
        let g = l1_inverse(&p("1"), 1e-10, 8, Exec::default()).unwrap();
        assert_eq!(g.terms.len(), 1);
        assert!(g.residual.unwrap().is_zero());
        assert_eq!(g.tail_bound, Some(0.0));
    }

    #[test]
    fn not_invertible_and_unreachable() {
        assert!(matches!(l1_inverse(&p("u1 - 1"), 1e-10, 8, Exec::default()), Err(Error::NotInvertible(_))));
        // 2.1 - u1 decays slowly: radius 4 cannot reach 1e-10
        let f = p("21 - 10*u1");
        assert!(matches!(l1_inverse(&f, 1e-10, 4, Exec::default()), Err(Error::ToleranceUnreachable { .. })));
    }

    #[test]
    fn two_dimensional_inverse() {
        let f = p("6 - u1 - u1^-1 - u2 - u2^-1");
        let g = l1_inverse(&f, 1e-10, 32, Exec::default()).unwrap();
        assert!(g.residual.unwrap().le_f64(1e-10));
    }

    #[test]
    fn matrix_examples() {
        let id = matrix_from_strs(&[&["1", "0"], &["0", "1"]]).unwrap();
        let g = matrix_l1_inverse(&id, 1e-10, 8, Exec::default()).unwrap();
        assert!(g.residual.is_zero());
        assert_eq!(g.get(0, 0).coefficient(&[0]), 1.0);
        assert!(g.get(0, 1).is_empty());

        let t = matrix_from_strs(&[&["2", "u1"], &["0", "2"]]).unwrap();
        let g = matrix_l1_inverse(&t, 1e-10, 8, Exec::default()).unwrap();
        assert!(g.residual.is_zero());
        assert_eq!(g.get(0, 0).coefficient(&[0]), 0.5);
        assert_eq!(g.get(0, 1).coefficient(&[1]), -0.25);
        assert_eq!(g.get(1, 1).coefficient(&[0]), 0.5);
        assert!(g.get(1, 0).is_empty());

        let dg = GroupRingMatrix::diagonal(vec![p("u1 - 2"), p("3 - u1 - u1^-1")]).unwrap();
        let g = matrix_l1_inverse(&dg, 1e-10, 64, Exec::default()).unwrap();
        let s1 = l1_inverse(&p("u1 - 2"), 1e-12, 64, Exec::default()).unwrap();
        let s2 = l1_inverse(&p("3 - u1 - u1^-1"), 1e-12, 64, Exec::default()).unwrap();
        for n in -8i64..=8 {
            assert!((g.get(0, 0).coefficient(&[n]) - s1.coefficient(&[n])).abs() < 1e-9);
            assert!((g.get(1, 1).coefficient(&[n]) - s2.coefficient(&[n])).abs() < 1e-9);
        }
        assert!(g.residual.le_f64(1e-10));
    }
}
