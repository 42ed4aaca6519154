//! Independence sets from `l^1` decay, and specification shadowing.

mod lattice;
mod shadow;

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::caps::WITNESS_CAP;
use crate::error::{Error, Result};
use crate::groupring::{torus_distance, Exponent};
use crate::homoclinic::HomoclinicPoint;
use crate::par::Exec;
use crate::window::{sup_norm, Window};

pub use lattice::{hermite_normal_form, PeriodLattice};
pub use shadow::{
    gap_radius, homoclinic_specification_check, shadow, Block, BlockError, ShadowLift, ShadowRequest, ShadowResult,
    SpecificationReport,
};

/// Greedy scan of `F` in order, keeping `s` when `s - t` and `t - s` avoid
/// `K` for every kept `t`. Each kept point rules out at most `2|K| + 1`
/// others, so `|F1| (2|K| + 1) >= |F|`.
pub fn greedy_separated_subset(f: &[Exponent], k: &[Exponent]) -> Vec<Exponent> {
    let kset: HashSet<&[i64]> = k.iter().map(|e| e.as_slice()).collect();
    let mut seen: HashSet<&[i64]> = HashSet::new();
    let mut chosen: Vec<Exponent> = Vec::new();
    for s in f {
        if !seen.insert(s.as_slice()) {
            continue;
        }
        let clash = chosen.iter().any(|t| {
            let fwd: Exponent = s.iter().zip(t).map(|(a, b)| a - b).collect();
            let back: Exponent = fwd.iter().map(|v| -v).collect();
            kset.contains(fwd.as_slice()) || kset.contains(back.as_slice())
        });
        if !clash {
            chosen.push(s.clone());
        }
    }
    chosen
}

/// One checked `sigma in {0,1}^{F1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessCheck {
    /// `sigma(s)` in the order of `f1`, as a string of 0/1.
    pub sigma: String,
    /// `max_{s in F1} rho_inf((s y_sigma)_0, sigma(s) x_0)` on lifts, plus
    /// the truncation allowance.
    pub distance: f64,
    pub passed: bool,
}

impl WitnessCheck {
    pub fn bits(&self) -> Vec<bool> {
        self.sigma.bytes().map(|b| b == b'1').collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndependenceReport {
    pub window: Window,
    pub eps: f64,
    /// `K` is the ball of this radius.
    pub interaction_radius: i64,
    pub k_size: usize,
    pub f1: Vec<Exponent>,
    pub density: f64,
    /// `1 / (2 |K - K| + 1)`.
    pub density_floor: f64,
    pub witnesses_checked: usize,
    /// `2^{|F1|}`, saturating.
    pub witnesses_total: u128,
    pub sampled: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub allowance: f64,
    /// `max(0, distance - eps)` over the checked witnesses.
    pub max_violation: f64,
    pub all_passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub witnesses: Vec<WitnessCheck>,
}

fn bits_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Builds `y_sigma = sum_{s in F1} sigma(s) (s^{-1} x)` for every
/// `sigma in {0,1}^{F1}` (or a seeded sample of `cap` of them when there
/// are more) and checks that `s y_sigma` lies within `eps` of `x` at the
/// origin when `sigma(s) = 1` and of `0` when `sigma(s) = 0`.
///
/// `K` is the smallest ball outside of which `x` carries `rho`-mass below
/// `eps` and `F1 = greedy_separated_subset(F, K - K)`.
pub fn independence_witnesses(
    x: &HomoclinicPoint,
    eps: f64,
    window: &Window,
    cap: Option<usize>,
    seed: u64,
    exec: Exec,
) -> Result<IndependenceReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let d = x.d();
    if window.dim() != d {
        return Err(Error::DimensionMismatch { left: d, right: window.dim() });
    }
    let cap = cap.unwrap_or(WITNESS_CAP).max(1);
    let f_points = window.points();
    let k = x.k();

    if x.support().is_empty() && x.tail_bound < eps {
        let n = f_points.len();
        return Ok(IndependenceReport {
            window: window.clone(),
            eps,
            interaction_radius: 0,
            k_size: 1,
            density: 1.0,
            density_floor: 1.0 / 3.0,
            f1: f_points,
            witnesses_checked: 0,
            witnesses_total: 1u128.checked_shl(n as u32).unwrap_or(u128::MAX),
            sampled: false,
            seed: None,
            allowance: x.tail_bound,
            max_violation: 0.0,
            all_passed: true,
            note: Some("x = 0: both neighbourhoods coincide".into()),
            witnesses: Vec::new(),
        });
    }

    let radius = x.interaction_radius(eps).ok_or(Error::NoInteractionSet { tail: x.tail_bound, eps })?;
    let kk = Window::ball(d, 2 * radius).points();
    let f1 = greedy_separated_subset(&f_points, &kk);
    let n1 = f1.len();

    // table[i][l] = x(s_l - s_i), the contribution of s_l^{-1} x at -s_i
    let diff_values = |i: usize, l: usize| -> Vec<f64> {
        let t: Exponent = f1[l].iter().zip(&f1[i]).map(|(a, b)| a - b).collect();
        (0..k).map(|j| x.value(j, &t)).collect()
    };
    // only pairs within the lift's reach contribute
    let reach = x.support_window().map(|w| w.lo.iter().chain(&w.hi).map(|v| v.abs()).max().unwrap_or(0)).unwrap_or(0);
    let neighbours: Vec<Vec<(usize, Vec<f64>)>> = (0..n1)
        .map(|i| {
            (0..n1)
                .filter(|&l| l != i)
                .filter(|&l| sup_norm(&f1[l].iter().zip(&f1[i]).map(|(a, b)| a - b).collect::<Vec<_>>()) <= reach)
                .map(|l| (l, diff_values(i, l)))
                .filter(|(_, v)| v.iter().any(|c| *c != 0.0))
                .collect()
        })
        .collect();
    let x0: Vec<f64> = (0..k).map(|j| x.value(j, &vec![0; d])).collect();
    let zero = vec![0.0; k];
    let allowance = (2.0 * x.tail_bound + 1e-12).next_up();

    let total = 1u128.checked_shl(n1 as u32).unwrap_or(u128::MAX);
    let sampled = n1 >= 127 || total > cap as u128;
    let sigmas: Vec<Vec<bool>> = if sampled {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..cap).map(|_| (0..n1).map(|_| rng.random::<bool>()).collect()).collect()
    } else {
        (0..total as usize).map(|mask| (0..n1).map(|i| (mask >> i) & 1 == 1).collect()).collect()
    };

    let check = |sigma: &Vec<bool>| -> WitnessCheck {
        let mut worst: f64 = 0.0;
        for i in 0..n1 {
            let mut y = if sigma[i] { x0.clone() } else { zero.clone() };
            for (l, v) in &neighbours[i] {
                if sigma[*l] {
                    for j in 0..k {
                        y[j] += v[j];
                    }
                }
            }
            let target = if sigma[i] { &x0 } else { &zero };
            worst = worst.max(torus_distance(&y, target).expect("same length"));
        }
        let distance = worst + allowance;
        WitnessCheck { sigma: bits_string(sigma), distance, passed: distance <= eps }
    };
    let witnesses = exec.map_slice(&sigmas, check);
    let max_violation = witnesses.iter().map(|w| (w.distance - eps).max(0.0)).fold(0.0, f64::max);
    let all_passed = witnesses.iter().all(|w| w.passed);
    let k_size = Window::ball(d, radius).len();
    Ok(IndependenceReport {
        window: window.clone(),
        eps,
        interaction_radius: radius,
        k_size,
        density: n1 as f64 / f_points.len() as f64,
        density_floor: 1.0 / (2.0 * kk.len() as f64 + 1.0),
        f1,
        witnesses_checked: witnesses.len(),
        witnesses_total: total,
        sampled,
        seed: sampled.then_some(seed),
        allowance,
        max_violation,
        all_passed,
        note: sampled.then(|| format!("{cap} of {total} witnesses sampled")),
        witnesses,
    })
}
