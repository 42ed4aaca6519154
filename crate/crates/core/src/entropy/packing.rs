//! Separated families built from translates of `x^Delta`.

use super::{EntropyEstimate, EntropyMethod};
use crate::caps::PACKING_FAMILY_CAP;
use crate::error::{Error, Result};
use crate::groupring::{wrap_signed, Exponent, GroupRingMatrix};
use crate::homoclinic::HomoclinicGroup;
use crate::independence::greedy_separated_subset;
use crate::par::Exec;
use crate::window::Window;

/// Counts an `(F, eps)`-separated subfamily of
/// `{ sum_{s in F1} c_s (s^{-1} x^Delta) : c in {0..levels-1}^{F1} }`
/// and returns `log(count) / |F|`.
///
/// Two members count as separated only if their lifts differ by more than
/// `eps` plus twice the truncation allowance at some coordinate `-f`,
/// `f in F`, so the true points are `(F, eps)`-separated and the value is a
/// guaranteed lower bound for `log N_{F,eps} / |F|`. `eps` defaults to
/// `1 / (2 ||A||_1)`.
pub fn packing_lower_bound(
    a: &GroupRingMatrix,
    window: &Window,
    eps: Option<f64>,
    levels: usize,
    exec: Exec,
) -> Result<EntropyEstimate> {
    let group = HomoclinicGroup::with_defaults(a, exec)?;
    if window.dim() != group.d() {
        return Err(Error::DimensionMismatch { left: group.d(), right: window.dim() });
    }
    if levels == 0 {
        return Err(Error::InvalidParameter("levels must be at least 1".into()));
    }
    let eps = eps.unwrap_or(1.0 / (2.0 * group.l1_norm()));
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let x = group.fundamental().swap_remove(0);
    let k = group.k();
    let f_points = window.points();

    let mut est = EntropyEstimate::new(EntropyMethod::PackingLowerBound, 0.0);
    est.param("window", window.to_string());
    est.param("eps", eps);
    est.param("levels", levels);
    est.flags.push("lower bound for log N(F, eps) / |F|".into());

    let radius = x.interaction_radius(eps).ok_or(Error::NoInteractionSet { tail: x.tail_bound, eps })?;
    let f1 = greedy_separated_subset(&f_points, &Window::ball(group.d(), 2 * radius).points());
    est.param("interaction_radius", radius);
    est.param("f1_size", f1.len());

    let allowance = ((levels - 1) as f64 * x.tail_bound + 1e-12).next_up();
    let threshold = eps + 2.0 * allowance;
    est.param("allowance", allowance);
    if levels == 1 || threshold >= 0.5 {
        // no two torus points are further apart than 1/2
        est.param("family_size", 1usize);
        est.param("separated", 1usize);
        return Ok(est);
    }

    let family = (levels as u128).checked_pow(f1.len() as u32).filter(|&n| n <= PACKING_FAMILY_CAP as u128).ok_or_else(|| {
        Error::CapExceeded(format!("family {levels}^{} exceeds {}", f1.len(), PACKING_FAMILY_CAP))
    })? as usize;

    // table[s][f][j] = x_j(s - f), the contribution of s^{-1} x at -f
    let table: Vec<Vec<Vec<f64>>> = f1
        .iter()
        .map(|s| {
            f_points
                .iter()
                .map(|f| {
                    let t: Exponent = s.iter().zip(f).map(|(a, b)| a - b).collect();
                    (0..k).map(|j| x.value(j, &t)).collect()
                })
                .collect()
        })
        .collect();
    let width = f_points.len() * k;
    let member = |idx: usize| -> Vec<f64> {
        let mut out = vec![0.0; width];
        let mut rest = idx;
        for row in &table {
            let c = (rest % levels) as f64;
            rest /= levels;
            if c != 0.0 {
                for (fi, vals) in row.iter().enumerate() {
                    for (j, v) in vals.iter().enumerate() {
                        out[fi * k + j] += c * v;
                    }
                }
            }
        }
        out
    };
    let members = exec.map_range(family, member);

    let separated = |p: &[f64], q: &[f64]| p.iter().zip(q).any(|(a, b)| wrap_signed(a - b).abs() > threshold);
    let mut kept: Vec<usize> = Vec::new();
    for (i, m) in members.iter().enumerate() {
        if !exec.any(&kept, |&j| !separated(m, &members[j])) {
            kept.push(i);
        }
    }
    est.value = (kept.len() as f64).ln() / f_points.len() as f64;
    est.param("family_size", family);
    est.param("separated", kept.len());
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupring::matrix_from_strs;

    #[test]
    fn three_minus_u_example() {
        let a = matrix_from_strs(&[&["3 - u1 - u1^-1"]]).unwrap();
        let w = Window::new(vec![0], vec![19]).unwrap();
        let est = packing_lower_bound(&a, &w, Some(0.05), 2, Exec::default()).unwrap();
        assert_eq!(est.parameters["interaction_radius"], 3);
        assert_eq!(est.parameters["f1_size"], 3);
        assert_eq!(est.parameters["separated"], 8);
        assert!(est.value > 0.0);
        assert!(est.value <= ((3.0 + 5f64.sqrt()) / 2.0).ln());
    }

    #[test]
    fn degenerate_parameters_give_zero() {
        let a = matrix_from_strs(&[&["3 - u1 - u1^-1"]]).unwrap();
        let w = Window::new(vec![0], vec![19]).unwrap();
        assert_eq!(packing_lower_bound(&a, &w, Some(0.6), 2, Exec::default()).unwrap().value, 0.0);
        assert_eq!(packing_lower_bound(&a, &w, Some(0.05), 1, Exec::default()).unwrap().value, 0.0);
    }
}
