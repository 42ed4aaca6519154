use num_bigint::BigInt;
use num_traits::Zero;

use super::grid::{grid_values, unflatten};
use super::{lipschitz_bound, TorusCertificate, Verdict};
use crate::error::{Error, Result};
use crate::groupring::{GroupRingElement, GroupRingMatrix};
use crate::par::Exec;

/// Default grid size per axis for dimension `d`.
pub fn default_grid(d: usize) -> usize {
    match d {
        1 => 1024,
        2 => 256,
        3 => 64,
        _ => 16,
    }
}

/// Largest dimension for which the exact search over the `4^d` points with
/// coordinates in `{0, 1/4, 1/2, 3/4}` is attempted.
const EXACT_SEARCH_MAX_DIM: usize = 8;

/// Looks for `theta in (Z/4)^d / 4` with `f^(theta) = 0`, evaluated exactly
/// in the Gaussian integers (`e^{2 pi i n j / 4} = i^{n.j}`).
fn exact_quarter_zero(f: &GroupRingElement) -> Option<Vec<f64>> {
    let d = f.dim();
    if f.coefficient_sum().is_zero() {
        return Some(vec![0.0; d]);
    }
    if d > EXACT_SEARCH_MAX_DIM {
        return None;
    }
    let terms: Vec<_> = f.terms().collect();
    let total = 4usize.pow(d as u32);
    for idx in 1..total {
        let j = unflatten(idx, 4, d);
        let mut re = BigInt::zero();
        let mut im = BigInt::zero();
        for (e, c) in &terms {
            let k: i64 = e.iter().zip(&j).map(|(&n, &x)| n * x as i64).sum::<i64>().rem_euclid(4);
            match k {
                0 => re += *c,
                1 => im += *c,
                2 => re -= *c,
                _ => im -= *c,
            }
        }
        if re.is_zero() && im.is_zero() {
            return Some(j.iter().map(|&x| x as f64 / 4.0).collect());
        }
    }
    None
}

/// Floating-point error allowance for FFT grid values of `f`.
fn rounding_slack(f: &GroupRingElement, points: usize) -> f64 {
    let n = points as f64;
    10.0 * f64::EPSILON * (n.log2() + 1.0) * n.sqrt() * f.l1_norm_f64()
}

/// Certifies `f^ != 0` on the whole torus from an `m^d` grid.
pub fn certify_invertible(f: &GroupRingElement, m: usize, exec: Exec) -> Result<TorusCertificate> {
    if m < 2 {
        return Err(Error::InvalidParameter("grid size must be at least 2".into()));
    }
    let d = f.dim();
    let lipschitz = lipschitz_bound(f);
    if f.is_zero() {
        return Ok(TorusCertificate {
            verdict: Verdict::NotInvertible,
            grid_size: m,
            grid_min: 0.0,
            lipschitz,
            margin: 0.0,
            rounding_slack: 0.0,
            witness: Some(vec![0.0; d]),
            determinant: None,
            guidance: None,
        });
    }
    let zero = exact_quarter_zero(f);
    let values = grid_values(f, m, false, exec)?;
    let grid_min = exec.min_by_key(&values, |v| v.norm());
    let margin = grid_min - lipschitz / (2.0 * m as f64);
    let slack = rounding_slack(f, values.len());
    let (verdict, guidance) = if zero.is_some() {
        (Verdict::NotInvertible, None)
    } else if margin > slack {
        (Verdict::Invertible, None)
    } else {
        let needed = if grid_min > 2.0 * slack {
            let m_min = lipschitz / (2.0 * (grid_min - slack));
            format!("retry with grid size at least {}", (m_min.ceil() as usize).next_power_of_two().max(2 * m))
        } else {
            "f^ appears to vanish; no exact zero found at rational points with denominator 4".to_string()
        };
        (Verdict::Unknown, Some(needed))
    };
    Ok(TorusCertificate {
        verdict,
        grid_size: m,
        grid_min,
        lipschitz,
        margin,
        rounding_slack: slack,
        witness: zero,
        determinant: None,
        guidance,
    })
}

/// [`certify_invertible`] at the default grid for the dimension.
pub fn certify_invertible_default(f: &GroupRingElement, exec: Exec) -> Result<TorusCertificate> {
    certify_invertible(f, default_grid(f.dim()), exec)
}

/// Certifies invertibility of a square matrix in `M_k(l^1(Z^d))` through
/// its exact determinant.
pub fn certify_matrix_invertible(a: &GroupRingMatrix, m: Option<usize>, exec: Exec) -> Result<TorusCertificate> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch("matrix must be square".into()));
    }
    let det = a.determinant()?;
    let mut cert = certify_invertible(&det, m.unwrap_or_else(|| default_grid(a.dim())), exec)?;
    cert.determinant = Some(det.to_string());
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupring::matrix_from_strs;

    fn p(s: &str) -> GroupRingElement {
        s.parse().unwrap()
    }

    #[test]
    fn scalar_examples() {
        let c = certify_invertible(&p("3 - u1 - u1^-1"), 2048, Exec::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Invertible);
        assert!((c.grid_min - 1.0).abs() < 1e-9);
        assert!(c.margin > 0.0);
        let h = certify_invertible_default(&p("4 - u1 - u1^-1 - u2 - u2^-1"), Exec::default()).unwrap();
        assert_eq!(h.verdict, Verdict::NotInvertible);
        assert_eq!(h.witness, Some(vec![0.0, 0.0]));
        let g = certify_invertible_default(&p("u1 - 2"), Exec::default()).unwrap();
        assert_eq!(g.verdict, Verdict::Invertible);
    }

    #[test]
    fn exact_zero_away_from_origin() {
        // 1 + u1 vanishes at theta = 1/2
        let c = certify_invertible_default(&p("1 + u1"), Exec::default()).unwrap();
        assert_eq!(c.verdict, Verdict::NotInvertible);
        assert_eq!(c.witness, Some(vec![0.5]));
        // 1 + u1^2 vanishes at theta = 1/4
        let c = certify_invertible_default(&p("1 + u1^2"), Exec::default()).unwrap();
        assert_eq!(c.witness, Some(vec![0.25]));
    }

    #[test]
    fn unknown_when_margin_is_small() {
        // a zero at an irrational point: 1 + u1 + u1^2 vanishes at 1/3
        let c = certify_invertible(&p("1 + u1 + u1^2"), 64, Exec::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Unknown);
        assert!(c.guidance.is_some());
        // coarse grid for an invertible element also stays Unknown
        let c = certify_invertible(&p("2 - u1^9"), 2, Exec::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Unknown);
    }

    #[test]
    fn matrix_examples() {
        let id = matrix_from_strs(&[&["1", "0"], &["0", "1"]]).unwrap();
        let c = certify_matrix_invertible(&id, None, Exec::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Invertible);
        assert_eq!(c.determinant.as_deref(), Some("1"));
        let a = matrix_from_strs(&[&["3 - u1", "1"], &["0", "3 - u1^-1"]]).unwrap();
        assert_eq!(certify_matrix_invertible(&a, None, Exec::default()).unwrap().verdict, Verdict::Invertible);
        let b = matrix_from_strs(&[&["u1 - 1"]]).unwrap();
        let c = certify_matrix_invertible(&b, None, Exec::default()).unwrap();
        assert_eq!(c.verdict, Verdict::NotInvertible);
        assert_eq!(c.witness, Some(vec![0.0]));
    }
}
