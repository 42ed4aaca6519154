//! Shadowing finitely many homoclinic blocks by a single point.
//!
//! A block `(F_j, x_j)` is turned into the integer vector
//! `w_j = round(x~_j A*)` restricted to `N_j = F_j + B(R)`, where `x~_j` is
//! the lift of `x_j` reduced into `[-1/2, 1/2)`. The shadow is
//! `y = P((sum_j w_j) (A*)^{-1})`. With `R` chosen so that the inverse
//! carries less than `eps / (2 ||A||_1)` outside `B(R)`, `y` follows each
//! `x_j` on `F_j`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::lattice::PeriodLattice;
use crate::error::{Error, Result};
use crate::groupring::{torus_distance, wrap_signed, Exponent, GroupRingElement};
use crate::homoclinic::{conv_int, HomoclinicGroup, HomoclinicPoint};
use crate::par::Exec;
use crate::window::Window;

#[derive(Debug, Clone)]
pub struct Block {
    pub window: Window,
    pub point: HomoclinicPoint,
}

#[derive(Debug, Clone)]
pub struct ShadowRequest {
    pub blocks: Vec<Block>,
    pub eps: f64,
    /// Rows span a finite-index subgroup of `Z^d`.
    pub periodic: Option<Vec<Vec<i64>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockError {
    pub block: usize,
    /// `max_{s in F_j} rho_inf(y_s, (x_j)_s)` on lifts.
    pub max_error: f64,
    pub allowance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShadowLift {
    Homoclinic(HomoclinicPoint),
    /// Values on the fundamental domain, in its lexicographic order.
    Periodic { lattice: PeriodLattice, domain: Window, values: Vec<Vec<f64>>, tail_bound: f64 },
}

impl ShadowLift {
    /// Lift value of coordinate `j` at `t`.
    pub fn value(&self, j: usize, t: &[i64]) -> f64 {
        match self {
            ShadowLift::Homoclinic(p) => p.value(j, t),
            ShadowLift::Periodic { lattice, domain, values, .. } => {
                values[domain_index(domain, &lattice.reduce(t))][j]
            }
        }
    }

    pub fn tail_bound(&self) -> f64 {
        match self {
            ShadowLift::Homoclinic(p) => p.tail_bound,
            ShadowLift::Periodic { tail_bound, .. } => *tail_bound,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShadowResult {
    pub gap_radius: i64,
    pub eps: f64,
    /// The integer row vector `sum_j w_j`.
    pub z: Vec<GroupRingElement>,
    pub y: ShadowLift,
    pub errors: Vec<BlockError>,
    pub passed: bool,
}

fn domain_index(domain: &Window, t: &[i64]) -> usize {
    let mut idx = 0usize;
    for i in 0..t.len() {
        let len = (domain.hi[i] - domain.lo[i] + 1) as usize;
        idx = idx * len + (t[i] - domain.lo[i]) as usize;
    }
    idx
}

/// Smallest `R` with `||G 1_{outside B(R)}||_1 + tail < eps / (2 ||A||_1)`
/// for the stored inverse `G` of `A*`.
pub fn gap_radius(group: &HomoclinicGroup, eps: f64) -> Result<i64> {
    let target = eps / (2.0 * group.l1_norm());
    let inv = group.inverse();
    let tail = inv.tail_bound;
    (0..=inv.radius())
        .find(|&r| inv.l1_outside(r) + tail < target)
        .ok_or(Error::NoInteractionSet { tail, eps: target })
}

/// `round(x~ A*)` on all of its support, with `x~` the reduced lift.
fn rounded_relation(group: &HomoclinicGroup, x: &HomoclinicPoint) -> Vec<BTreeMap<Exponent, i64>> {
    let k = group.k();
    let reduced: Vec<BTreeMap<Exponent, f64>> = x
        .lift
        .iter()
        .map(|l| l.terms.iter().map(|(e, v)| (e.clone(), wrap_signed(*v))).collect())
        .collect();
    (0..k)
        .map(|j| {
            let mut acc = BTreeMap::new();
            for (i, r) in reduced.iter().enumerate() {
                conv_int(group.matrix_star().get(i, j), r, &mut acc);
            }
            acc.into_iter().map(|(e, v)| (e, v.round() as i64)).filter(|(_, v)| *v != 0).collect()
        })
        .collect()
}

fn check_point(group: &HomoclinicGroup, x: &HomoclinicPoint) -> Result<()> {
    if x.a != *group.matrix() {
        return Err(Error::InvalidParameter("block point belongs to a different presentation".into()));
    }
    Ok(())
}

/// Shadows the blocks of `req` by one point of `X_A`; with a period
/// lattice the shadow is invariant under it by construction.
pub fn shadow(group: &HomoclinicGroup, req: &ShadowRequest, exec: Exec) -> Result<ShadowResult> {
    if !(req.eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let (k, d) = (group.k(), group.d());
    for b in &req.blocks {
        if b.window.dim() != d {
            return Err(Error::DimensionMismatch { left: d, right: b.window.dim() });
        }
        check_point(group, &b.point)?;
    }
    let r = gap_radius(group, req.eps)?;
    let hoods: Vec<Window> = req.blocks.iter().map(|b| b.window.expand(r)).collect();
    for i in 0..hoods.len() {
        for j in i + 1..hoods.len() {
            if hoods[i].intersects(&hoods[j]) {
                return Err(Error::BlocksTooClose { first: i, second: j, radius: r });
            }
        }
    }
    let lattice = req.periodic.as_deref().map(PeriodLattice::new).transpose()?;
    if let Some(l) = &lattice {
        if l.dim() != d {
            return Err(Error::DimensionMismatch { left: d, right: l.dim() });
        }
        let mut seen = BTreeSet::new();
        for h in &hoods {
            for t in h.points() {
                if !seen.insert(l.reduce(&t)) {
                    return Err(Error::DomainTooSmall { radius: r });
                }
            }
        }
    }

    let mut z: Vec<BTreeMap<Exponent, i64>> = vec![BTreeMap::new(); k];
    for (b, h) in req.blocks.iter().zip(&hoods) {
        for (j, wj) in rounded_relation(group, &b.point).into_iter().enumerate() {
            for (e, v) in wj {
                if h.contains(&e) {
                    *z[j].entry(e).or_insert(0) += v;
                }
            }
        }
    }
    let z: Vec<GroupRingElement> = z
        .into_iter()
        .map(|m| GroupRingElement::from_terms(d, m))
        .collect::<Result<_>>()?;

    let y = match &lattice {
        None => ShadowLift::Homoclinic(group.element(&z)?),
        Some(l) => periodic_lift(group, l, &z)?,
    };

    let tail_y = y.tail_bound();
    let errors = exec.map_slice(&req.blocks.iter().enumerate().collect::<Vec<_>>(), |(idx, b)| {
        let mut worst: f64 = 0.0;
        for s in b.window.points() {
            let ys: Vec<f64> = (0..k).map(|j| y.value(j, &s)).collect();
            let xs: Vec<f64> = (0..k).map(|j| b.point.value(j, &s)).collect();
            worst = worst.max(torus_distance(&ys, &xs).expect("same length"));
        }
        let allowance = (tail_y + b.point.tail_bound + 1e-12).next_up();
        BlockError { block: *idx, max_error: worst, allowance, passed: worst + allowance <= req.eps }
    });
    let passed = errors.iter().all(|e| e.passed);
    Ok(ShadowResult { gap_radius: r, eps: req.eps, z, y, errors, passed })
}

/// `y = z G_per` on the fundamental domain, where `G_per` folds the
/// truncated inverse onto the domain.
fn periodic_lift(group: &HomoclinicGroup, lattice: &PeriodLattice, z: &[GroupRingElement]) -> Result<ShadowLift> {
    let k = group.k();
    let domain = lattice.domain();
    let size = domain.len();
    let inv = group.inverse();
    let folded: Vec<BTreeMap<Exponent, f64>> = (0..k * k)
        .map(|ij| {
            let mut acc = BTreeMap::new();
            for (e, v) in &inv.entries[ij].terms {
                *acc.entry(lattice.reduce(e)).or_insert(0.0) += v;
            }
            acc
        })
        .collect();
    let mut values = vec![vec![0.0; k]; size];
    for (i, zi) in z.iter().enumerate() {
        for (t, c) in zi.terms() {
            let c = num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN);
            for j in 0..k {
                for (e, g) in &folded[i * k + j] {
                    let s: Exponent = t.iter().zip(e).map(|(a, b)| a + b).collect();
                    values[domain_index(&domain, &lattice.reduce(&s))][j] += c * g;
                }
            }
        }
    }
    let z_norm: f64 = z.iter().map(|m| m.l1_norm_f64()).sum();
    let tail_bound = (z_norm * inv.tail_bound + 1e-15 * z_norm * inv.l1_norm()).next_up();
    Ok(ShadowLift::Periodic { lattice: lattice.clone(), domain, values, tail_bound })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecificationReport {
    pub eps: f64,
    pub gap_radius: i64,
    /// The gap set `F = B(2R)`; the outside clause covers `Z^d \ (F1 + F)`.
    pub gap_set: Window,
    pub inside_error: f64,
    pub outside_max: f64,
    pub allowance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Shadows `x` on `F1` and checks that the shadow also stays within `eps`
/// of `0` off `F1 + B(2R)`.
pub fn homoclinic_specification_check(
    group: &HomoclinicGroup,
    eps: f64,
    f1: &Window,
    x: &HomoclinicPoint,
    exec: Exec,
) -> Result<SpecificationReport> {
    let d = group.d();
    if f1.dim() != d {
        return Err(Error::DimensionMismatch { left: d, right: f1.dim() });
    }
    if eps >= 0.5 {
        return Ok(SpecificationReport {
            eps,
            gap_radius: 0,
            gap_set: Window::ball(d, 0),
            inside_error: 0.0,
            outside_max: 0.0,
            allowance: 0.0,
            passed: true,
            note: Some("eps >= 1/2: every point is within eps of every other".into()),
        });
    }
    check_point(group, x)?;
    let r = gap_radius(group, eps)?;
    let hood = f1.expand(r);
    if rounded_relation(group, x).iter().flat_map(|m| m.keys()).any(|e| !hood.contains(e)) {
        return Err(Error::SupportExceedsWindow);
    }
    let res = shadow(group, &ShadowRequest { blocks: vec![Block { window: f1.clone(), point: x.clone() }], eps, periodic: None }, exec)?;
    let ShadowLift::Homoclinic(y) = &res.y else { unreachable!("no period lattice") };
    let outer = f1.expand(2 * r);
    let outside_max = y.support().iter().filter(|t| !outer.contains(t)).map(|t| y.rho_zero(t)).fold(0.0, f64::max);
    let allowance = (y.tail_bound + 1e-12).next_up();
    let inside = &res.errors[0];
    let passed = inside.passed && outside_max + allowance <= eps;
    Ok(SpecificationReport {
        eps,
        gap_radius: r,
        gap_set: Window::ball(d, 2 * r),
        inside_error: inside.max_error + inside.allowance,
        outside_max,
        allowance,
        passed,
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupring::matrix_from_strs;

    fn group() -> HomoclinicGroup {
        let a = matrix_from_strs(&[&["3 - u1 - u1^-1"]]).unwrap();
        HomoclinicGroup::with_defaults(&a, Exec::default()).unwrap()
    }

    #[test]
    fn gap_radius_from_geometric_tail() {
        // outside B(R) the inverse carries 2 r^{R+1} / (sqrt5 (1 - r))
        let g = group();
        assert_eq!(gap_radius(&g, 0.05).unwrap(), 5);
        assert_eq!(gap_radius(&g, 0.1).unwrap(), 5);
        assert_eq!(gap_radius(&g, 0.01).unwrap(), 7);
    }

    #[test]
    fn two_blocks() {
        let g = group();
        let x = g.fundamental().remove(0);
        let blocks = vec![
            Block { window: Window::new(vec![0], vec![4]).unwrap(), point: x.translate(&[2]) },
            Block { window: Window::new(vec![40], vec![44]).unwrap(), point: x.translate(&[42]) },
        ];
        let res = shadow(&g, &ShadowRequest { blocks, eps: 0.05, periodic: None }, Exec::default()).unwrap();
        assert!(res.passed, "{:?}", res.errors);
        assert_eq!(res.z[0], "u1^2 + u1^42".parse().unwrap());
    }

    #[test]
    fn blocks_too_close() {
        let g = group();
        let x = g.fundamental().remove(0);
        let blocks = vec![
            Block { window: Window::new(vec![0], vec![4]).unwrap(), point: x.clone() },
            Block { window: Window::new(vec![10], vec![14]).unwrap(), point: x },
        ];
        let err = shadow(&g, &ShadowRequest { blocks, eps: 0.05, periodic: None }, Exec::default()).unwrap_err();
        assert!(matches!(err, Error::BlocksTooClose { first: 0, second: 1, .. }));
    }

    #[test]
    fn periodic_shadow_is_exactly_periodic() {
        let g = group();
        let x = g.fundamental().remove(0);
        let req = ShadowRequest {
            blocks: vec![Block { window: Window::new(vec![0], vec![4]).unwrap(), point: x }],
            eps: 0.05,
            periodic: Some(vec![vec![64]]),
        };
        let res = shadow(&g, &req, Exec::default()).unwrap();
        assert!(res.passed);
        for n in -70..70 {
            assert_eq!(res.y.value(0, &[n]).to_bits(), res.y.value(0, &[n + 64]).to_bits());
        }
        let tight = ShadowRequest { periodic: Some(vec![vec![10]]), ..req };
        assert!(matches!(shadow(&g, &tight, Exec::default()), Err(Error::DomainTooSmall { .. })));
    }

    #[test]
    fn empty_request_gives_zero() {
        let g = group();
        let res = shadow(&g, &ShadowRequest { blocks: vec![], eps: 0.1, periodic: None }, Exec::default()).unwrap();
        let ShadowLift::Homoclinic(y) = res.y else { panic!() };
        assert!(y.support().is_empty());
    }

    #[test]
    fn specification_examples() {
        let g = group();
        let x = g.fundamental().remove(0);
        let w = Window::new(vec![0], vec![0]).unwrap();
        let rep = homoclinic_specification_check(&g, 0.1, &w, &x, Exec::default()).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.gap_set, Window::ball(1, 10));
        assert!(homoclinic_specification_check(&g, 0.5, &w, &x, Exec::default()).unwrap().passed);
        let far = x.translate(&[100]);
        assert!(matches!(homoclinic_specification_check(&g, 0.1, &w, &far, Exec::default()), Err(Error::SupportExceedsWindow)));
    }
}
