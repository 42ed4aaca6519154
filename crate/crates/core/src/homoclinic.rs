//! Homoclinic points of `X_A` for square `A` invertible in `M_k(l^1)`.
//!
//! Points are row vectors `x in ((R/Z)^k)^{Z^d}` with `x A* = 0`; the shift
//! acts by `(s x)_t = x_{t-s}`, which on lifts is multiplication by `u^s`.
//! Every homoclinic point is `P(m (A*)^{-1})` for a row vector
//! `m in (Z[Z^d])^k`, and `P(m (A*)^{-1}) = 0` exactly when `m` lies in
//! `(Z[Z^d])^k A*`.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupring::{wrap_signed, Exponent, GroupRingElement, GroupRingMatrix};
use crate::par::Exec;
use crate::torus::{matrix_l1_inverse, L1Approximant, MatrixL1Inverse};
use crate::window::{spiral, sup_norm, Window};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Default truncation radius cap for inverses in dimension `d`.
pub fn default_radius_cap(d: usize) -> usize {
    match d {
        1 => 256,
        2 => 48,
        3 => 16,
        _ => 8,
    }
}

/// `m * g` for an integer Laurent polynomial `m` and a real one `g`.
pub(crate) fn conv_int(m: &GroupRingElement, g: &BTreeMap<Exponent, f64>, acc: &mut BTreeMap<Exponent, f64>) {
    for (e, c) in m.terms() {
        let c = num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN);
        for (n, v) in g {
            let t: Exponent = e.iter().zip(n).map(|(a, b)| a + b).collect();
            *acc.entry(t).or_insert(0.0) += c * v;
        }
    }
}

/// The homoclinic group `Delta(X_A)` together with a certified
/// approximation `G` of `(A*)^{-1}`.
#[derive(Debug, Clone)]
pub struct HomoclinicGroup {
    a: GroupRingMatrix,
    a_star: GroupRingMatrix,
    inverse: MatrixL1Inverse,
    tol: f64,
}

impl HomoclinicGroup {
    pub fn new(a: &GroupRingMatrix, tol: f64, radius_cap: usize, exec: Exec) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::ShapeMismatch("homoclinic groups need a square presentation".into()));
        }
        let a_star = a.involution();
        let inverse = matrix_l1_inverse(&a_star, tol, radius_cap, exec)?;
        Ok(Self { a: a.clone(), a_star, inverse, tol })
    }

    /// With the default tolerance and radius cap.
    pub fn with_defaults(a: &GroupRingMatrix, exec: Exec) -> Result<Self> {
        Self::new(a, DEFAULT_TOL, default_radius_cap(a.dim()), exec)
    }

    pub fn k(&self) -> usize {
        self.a.rows()
    }

    pub fn d(&self) -> usize {
        self.a.dim()
    }

    pub fn matrix(&self) -> &GroupRingMatrix {
        &self.a
    }

    pub fn matrix_star(&self) -> &GroupRingMatrix {
        &self.a_star
    }

    /// The approximation `G` of `(A*)^{-1}`.
    pub fn inverse(&self) -> &MatrixL1Inverse {
        &self.inverse
    }

    pub fn l1_norm(&self) -> f64 {
        self.a.entries().iter().map(|e| e.l1_norm_f64()).sum()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Tolerance for the annihilation check, `10 tol ||A||_1`.
    pub fn membership_tol(&self) -> f64 {
        10.0 * self.tol * self.l1_norm()
    }

    /// `P(m (A*)^{-1})`.
    pub fn element(&self, m: &[GroupRingElement]) -> Result<HomoclinicPoint> {
        let (k, d) = (self.k(), self.d());
        if m.len() != k {
            return Err(Error::ShapeMismatch(format!("expected {k} components, got {}", m.len())));
        }
        if let Some(bad) = m.iter().find(|x| x.dim() != d) {
            return Err(Error::DimensionMismatch { left: d, right: bad.dim() });
        }
        let mut lift = Vec::with_capacity(k);
        for j in 0..k {
            let mut acc = BTreeMap::new();
            for (i, mi) in m.iter().enumerate() {
                conv_int(mi, &self.inverse.get(i, j).terms, &mut acc);
            }
            acc.retain(|_, v| *v != 0.0);
            lift.push(L1Approximant::exact(d, acc));
        }
        let m_norm: f64 = m.iter().map(|x| x.l1_norm_f64()).sum();
        let rounding = 1e-15 * m_norm * self.inverse.l1_norm();
        let tail = (m_norm * self.inverse.tail_bound + rounding).next_up();
        for l in &mut lift {
            l.tail_bound = Some(tail);
        }
        Ok(HomoclinicPoint { a: self.a.clone(), a_star: self.a_star.clone(), lift, tail_bound: tail, provenance: m.to_vec() })
    }

    /// `P(e_i (A*)^{-1})` for each standard basis row `e_i`.
    pub fn fundamental(&self) -> Vec<HomoclinicPoint> {
        let (k, d) = (self.k(), self.d());
        (0..k)
            .map(|i| {
                let m: Vec<GroupRingElement> =
                    (0..k).map(|j| if i == j { GroupRingElement::one(d) } else { GroupRingElement::zero(d) }).collect();
                self.element(&m).expect("basis row has the right shape")
            })
            .collect()
    }

    pub fn zero_point(&self) -> HomoclinicPoint {
        self.element(&vec![GroupRingElement::zero(self.d()); self.k()]).expect("zero row")
    }
}

/// `x^Delta` for each basis row.
pub fn fundamental_homoclinic(a: &GroupRingMatrix, tol: f64, exec: Exec) -> Result<Vec<HomoclinicPoint>> {
    Ok(HomoclinicGroup::new(a, tol, default_radius_cap(a.dim()), exec)?.fundamental())
}

/// `P(m (A*)^{-1})`.
pub fn group_element(a: &GroupRingMatrix, m: &[GroupRingElement], tol: f64, exec: Exec) -> Result<HomoclinicPoint> {
    HomoclinicGroup::new(a, tol, default_radius_cap(a.dim()), exec)?.element(m)
}

/// A truncated lift of a homoclinic point with an `l^1` bound on what was
/// cut off.
#[derive(Debug, Clone, PartialEq)]
pub struct HomoclinicPoint {
    pub a: GroupRingMatrix,
    a_star: GroupRingMatrix,
    /// One real function on `Z^d` per coordinate.
    pub lift: Vec<L1Approximant>,
    /// Bound on `sum_j ||x_j - lift_j||_1`.
    pub tail_bound: f64,
    /// The row vector `m` with `lift ~ m (A*)^{-1}`.
    pub provenance: Vec<GroupRingElement>,
}

impl Serialize for HomoclinicPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let points: Vec<(Exponent, Vec<f64>)> = self.support().into_iter().map(|t| {
            let v = (0..self.k()).map(|j| self.value(j, &t)).collect();
            (t, v)
        }).collect();
        let mut st = s.serialize_struct("HomoclinicPoint", 4)?;
        st.serialize_field("a", &self.a)?;
        st.serialize_field("points", &points)?;
        st.serialize_field("tail_bound", &self.tail_bound)?;
        let prov: Vec<String> = self.provenance.iter().map(|m| m.to_string()).collect();
        st.serialize_field("provenance", &prov)?;
        st.end()
    }
}

impl HomoclinicPoint {
    pub fn k(&self) -> usize {
        self.lift.len()
    }

    pub fn d(&self) -> usize {
        self.a.dim()
    }

    /// Lift value of coordinate `j` at `t`.
    pub fn value(&self, j: usize, t: &[i64]) -> f64 {
        self.lift[j].coefficient(t)
    }

    /// Representative in `[-1/2, 1/2)`.
    pub fn reduced(&self, j: usize, t: &[i64]) -> f64 {
        wrap_signed(self.value(j, t))
    }

    /// `rho_inf(x_t, 0)`.
    pub fn rho_zero(&self, t: &[i64]) -> f64 {
        (0..self.k()).map(|j| self.reduced(j, t).abs()).fold(0.0, f64::max)
    }

    /// Union of the coordinate supports, lexicographic.
    pub fn support(&self) -> BTreeSet<Exponent> {
        self.lift.iter().flat_map(|l| l.terms.keys().cloned()).collect()
    }

    /// Smallest box containing the support (`None` for an empty lift).
    pub fn support_window(&self) -> Option<Window> {
        let d = self.d();
        let sup = self.support();
        let first = sup.iter().next()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for e in &sup {
            for i in 0..d {
                lo[i] = lo[i].min(e[i]);
                hi[i] = hi[i].max(e[i]);
            }
        }
        Window::new(lo, hi).ok()
    }

    /// `max_t rho_inf(x_t, 0)` over the truncated support.
    pub fn sup_distance_to_zero(&self) -> f64 {
        self.support().iter().map(|t| self.rho_zero(t)).fold(0.0, f64::max)
    }

    /// Upper bound on `sum_{|t|_inf > r} rho_inf(x_t, 0)` for the true point.
    pub fn outside_mass(&self, r: i64) -> f64 {
        let s: f64 = self.support().iter().filter(|t| sup_norm(t) > r).map(|t| self.rho_zero(t)).sum();
        (s + self.tail_bound).next_up()
    }

    /// Smallest `r >= 0` with `outside_mass(r) < eps`, or `None` when the
    /// tail bound alone reaches `eps`.
    pub fn interaction_radius(&self, eps: f64) -> Option<i64> {
        if self.tail_bound >= eps {
            return None;
        }
        let mut by_radius: BTreeMap<i64, f64> = BTreeMap::new();
        for t in self.support() {
            *by_radius.entry(sup_norm(&t)).or_insert(0.0) += self.rho_zero(&t);
        }
        // walk radii downwards, accumulating the mass outside
        let mut outside = self.tail_bound;
        let mut best = by_radius.keys().next_back().copied().unwrap_or(0);
        for (&r, &m) in by_radius.iter().rev() {
            if outside.next_up() >= eps {
                break;
            }
            best = r;
            outside += m;
        }
        if outside.next_up() < eps {
            best = 0;
        }
        Some(best)
    }

    fn same_group(&self, other: &Self) -> Result<()> {
        if self.a != other.a {
            return Err(Error::InvalidParameter("points belong to different presentations".into()));
        }
        Ok(())
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        self.same_group(other)?;
        let lift = self
            .lift
            .iter()
            .zip(&other.lift)
            .map(|(a, b)| {
                let mut t = a.terms.clone();
                for (e, v) in &b.terms {
                    *t.entry(e.clone()).or_insert(0.0) += sign * v;
                }
                t.retain(|_, v| *v != 0.0);
                let mut l = L1Approximant::exact(a.d, t);
                l.tail_bound = Some(self.tail_bound + other.tail_bound);
                l
            })
            .collect();
        let provenance = self
            .provenance
            .iter()
            .zip(&other.provenance)
            .map(|(a, b)| if sign > 0.0 { a + b } else { a - b })
            .collect();
        Ok(Self {
            a: self.a.clone(),
            a_star: self.a_star.clone(),
            lift,
            tail_bound: (self.tail_bound + other.tail_bound).next_up(),
            provenance,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    /// The translate `s x`, `(s x)_t = x_{t-s}`.
    pub fn translate(&self, s: &[i64]) -> Self {
        let lift = self
            .lift
            .iter()
            .map(|l| {
                let t = l.terms.iter().map(|(e, v)| (e.iter().zip(s).map(|(a, b)| a + b).collect(), *v)).collect();
                let mut out = L1Approximant::exact(l.d, t);
                out.tail_bound = l.tail_bound;
                out
            })
            .collect();
        Self {
            a: self.a.clone(),
            a_star: self.a_star.clone(),
            lift,
            tail_bound: self.tail_bound,
            provenance: self.provenance.iter().map(|m| m.shift(s)).collect(),
        }
    }

    /// `lift A*`, which approximates the integer row vector `m`.
    pub fn times_a_star(&self) -> Vec<BTreeMap<Exponent, f64>> {
        let k = self.k();
        (0..k)
            .map(|j| {
                let mut acc = BTreeMap::new();
                for i in 0..k {
                    conv_int(self.a_star.get(i, j), &self.lift[i].terms, &mut acc);
                }
                acc
            })
            .collect()
    }

    /// `max |frac(lift A*)|` over the support of the product: how far the
    /// reduced lift is from satisfying `x A* = 0`.
    pub fn membership_defect(&self) -> f64 {
        self.times_a_star().iter().flat_map(|m| m.values().map(|v| wrap_signed(*v).abs())).fold(0.0, f64::max)
    }

    /// `max |lift A* - m|`, the distance to the defining integer vector.
    pub fn relation_defect(&self) -> f64 {
        let prod = self.times_a_star();
        let mut worst: f64 = 0.0;
        for (j, pj) in prod.iter().enumerate() {
            let keys: BTreeSet<&Exponent> = pj.keys().chain(self.provenance[j].terms().map(|(e, _)| e)).collect();
            for e in keys {
                let target = num_traits::ToPrimitive::to_f64(&self.provenance[j].coefficient(e)).unwrap_or(f64::NAN);
                worst = worst.max((pj.get(e).copied().unwrap_or(0.0) - target).abs());
            }
        }
        worst
    }
}

/// A value of `Psi_{x, phi}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiValue {
    pub re: f64,
    pub im: f64,
}

impl PsiValue {
    pub fn norm(&self) -> f64 {
        Complex64::new(self.re, self.im).norm()
    }
}

/// `sum_j sum_t phi_{j,t} x_{j,t-s}`, whose class mod 1 gives `<s x, phi>`.
fn pairing_phase(x: &HomoclinicPoint, phi: &[GroupRingElement], s: &[i64]) -> f64 {
    let mut acc = 0.0;
    for (j, p) in phi.iter().enumerate() {
        for (t, c) in p.terms() {
            let u: Exponent = t.iter().zip(s).map(|(a, b)| a - b).collect();
            let c = num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN);
            acc += c * x.value(j, &u);
        }
    }
    acc
}

/// `Psi_{x,phi}(s) = <s x, phi> - 1` for each `s` in the window.
pub fn psi(x: &HomoclinicPoint, phi: &[GroupRingElement], window: &[Exponent]) -> Result<Vec<PsiValue>> {
    if phi.len() != x.k() {
        return Err(Error::ShapeMismatch(format!("phi has {} components, point has {}", phi.len(), x.k())));
    }
    Ok(window
        .iter()
        .map(|s| {
            let phase = 2.0 * std::f64::consts::PI * pairing_phase(x, phi, s).rem_euclid(1.0);
            let z = Complex64::from_polar(1.0, phase) - 1.0;
            PsiValue { re: z.re, im: z.im }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct Delta1Certificate {
    /// `sum_s rho_inf(x_s, 0)` over the truncated support.
    pub support_sum: f64,
    pub tail_bound: f64,
    /// Upper bound for `sum_s rho_inf(x_s, 0)` over all of `Z^d`.
    pub total: f64,
    pub finite: bool,
    /// `2 pi ||phi||_1 total`, bounding `||Psi_{x,phi}||_1` for each generator.
    pub psi_l1_bounds: Vec<f64>,
}

/// Certificate that `s -> rho(x_s, 0)` is summable, so `x` lies in the
/// `l^1`-homoclinic group.
pub fn delta1_membership(x: &HomoclinicPoint, generators: &[Vec<GroupRingElement>]) -> Delta1Certificate {
    let support_sum: f64 = x.support().iter().map(|t| x.rho_zero(t)).sum();
    let total = (support_sum + x.tail_bound).next_up();
    let psi_l1_bounds = generators
        .iter()
        .map(|phi| 2.0 * std::f64::consts::PI * phi.iter().map(|p| p.l1_norm_f64()).sum::<f64>() * total)
        .collect();
    Delta1Certificate { support_sum, tail_bound: x.tail_bound, total, finite: total.is_finite(), psi_l1_bounds }
}

/// The standard basis rows `e_1, ..., e_k` of `(Z[Z^d])^k`, which generate
/// the dual module.
pub fn standard_generators(k: usize, d: usize) -> Vec<Vec<GroupRingElement>> {
    (0..k)
        .map(|i| (0..k).map(|j| if i == j { GroupRingElement::one(d) } else { GroupRingElement::zero(d) }).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricValue {
    pub value: f64,
    /// Bound on the omitted terms `j > terms`, `2 |W| 2^{-terms}`.
    pub truncation_bound: f64,
    /// Bound on the effect of the lift tails.
    pub approximation_bound: f64,
    pub terms: usize,
}

/// `rho(x, y) = sum_j sum_{phi in W} 2^{-j} |Psi_{x-y,phi}(s_j)|` with
/// `s_1, s_2, ...` the fixed enumeration [`spiral`], cut after `terms`.
pub fn summable_metric_distance(
    x: &HomoclinicPoint,
    y: &HomoclinicPoint,
    generators: &[Vec<GroupRingElement>],
    terms: usize,
) -> Result<MetricValue> {
    let diff = x.sub(y)?;
    let order = spiral(x.d(), terms);
    let mut value = 0.0;
    for phi in generators {
        let vals = psi(&diff, phi, &order)?;
        let mut w = 1.0;
        for v in vals {
            w *= 0.5;
            value += w * v.norm();
        }
    }
    let truncation_bound = 2.0 * generators.len() as f64 * 0.5f64.powi(terms as i32);
    let approximation_bound = 2.0
        * std::f64::consts::PI
        * generators.iter().map(|phi| phi.iter().map(|p| p.l1_norm_f64()).sum::<f64>()).sum::<f64>()
        * diff.tail_bound;
    Ok(MetricValue { value, truncation_bound, approximation_bound, terms })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairingReport {
    pub window: Window,
    pub max_discrepancy: f64,
    /// Error allowance from the lift tails of both points.
    pub allowance: f64,
    pub points_checked: usize,
}

/// Compares `Psi_{x, m1}(s)` with `Psi_{z, m2}(-s)` where `x = P(m2 (A*)^{-1})`
/// is in `X_A` and `z = P(m1 A^{-1})` is in `X_{A*}`. Both sides are
/// `<x, s m1>` written two ways, so they agree exactly.
pub fn pairing_symmetry_check(
    a: &GroupRingMatrix,
    m1: &[GroupRingElement],
    m2: &[GroupRingElement],
    window: &Window,
    tol: f64,
    exec: Exec,
) -> Result<PairingReport> {
    let cap = default_radius_cap(a.dim());
    let g = HomoclinicGroup::new(a, tol, cap, exec)?;
    let g_star = HomoclinicGroup::new(&a.involution(), tol, cap, exec)?;
    let x = g.element(m2)?;
    let z = g_star.element(m1)?;
    let pts = window.points();
    let neg: Vec<Exponent> = pts.iter().map(|s| s.iter().map(|v| -v).collect()).collect();
    let lhs = psi(&x, m1, &pts)?;
    let rhs = psi(&z, m2, &neg)?;
    let max_discrepancy = lhs
        .iter()
        .zip(&rhs)
        .map(|(p, q)| Complex64::new(p.re - q.re, p.im - q.im).norm())
        .fold(0.0, f64::max);
    let n1: f64 = m1.iter().map(|p| p.l1_norm_f64()).sum();
    let n2: f64 = m2.iter().map(|p| p.l1_norm_f64()).sum();
    let allowance = 2.0 * std::f64::consts::PI * (n1 * x.tail_bound + n2 * z.tail_bound);
    Ok(PairingReport { window: window.clone(), max_discrepancy, allowance, points_checked: pts.len() })
}
