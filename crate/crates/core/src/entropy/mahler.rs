use serde::Serialize;

use super::{EntropyEstimate, EntropyMethod};
use crate::error::{Error, Result};
use crate::groupring::{GroupRingElement, GroupRingMatrix};
use crate::par::Exec;
use crate::torus::{certify_invertible_default, grid::grid_values, lipschitz_bound, Verdict};

/// Grid values below this magnitude are left out of the quadrature.
const LOG_FLOOR: f64 = 1e-12;

/// Block length of the fixed-order summation.
const SUM_BLOCK: usize = 4096;

struct Quadrature {
    mean: f64,
    excluded: usize,
    grid_min: f64,
}

fn midpoint_mean_log(f: &GroupRingElement, m: usize, exec: Exec) -> Result<Quadrature> {
    let vals = grid_values(f, m, true, exec)?;
    let blocks: Vec<&[num_complex::Complex64]> = vals.chunks(SUM_BLOCK).collect();
    // per-block sums in index order, then the block sums in order, so the
    // result does not depend on the execution strategy
    let partial = exec.map_slice(&blocks, |b| {
        let mut s = 0.0;
        let mut excluded = 0usize;
        let mut min = f64::INFINITY;
        for v in b.iter() {
            let a = v.norm();
            min = min.min(a);
            if a < LOG_FLOOR {
                excluded += 1;
            } else {
                s += a.ln();
            }
        }
        (s, excluded, min)
    });
    let (mut sum, mut excluded, mut grid_min) = (0.0, 0usize, f64::INFINITY);
    for (s, e, mn) in partial {
        sum += s;
        excluded += e;
        grid_min = grid_min.min(mn);
    }
    let used = vals.len() - excluded;
    if used == 0 {
        return Err(Error::InvalidParameter("f^ vanishes at every grid point".into()));
    }
    Ok(Quadrature { mean: sum / used as f64, excluded, grid_min })
}

/// `log M(f) = integral of log |f^|` over the torus, by the `m^d`
/// midpoint rule. The error estimate `|est(m) - est(m/2)|` is attached
/// only when the grid itself certifies that `f^` has no zeros.
pub fn mahler_measure(f: &GroupRingElement, m: usize, exec: Exec) -> Result<EntropyEstimate> {
    if f.is_zero() {
        return Err(Error::InvalidParameter("Mahler measure of 0 is undefined".into()));
    }
    if m < 2 {
        return Err(Error::InvalidParameter("grid size must be at least 2".into()));
    }
    let q = midpoint_mean_log(f, m, exec)?;
    let mut est = EntropyEstimate::new(EntropyMethod::MahlerQuadrature, q.mean);
    est.param("grid", m);
    est.param("dim", f.dim());
    let certified = q.excluded == 0 && q.grid_min - lipschitz_bound(f) / (2.0 * m as f64) > 0.0;
    if certified {
        if m >= 4 {
            let coarse = midpoint_mean_log(f, m / 2, exec)?;
            est.error_estimate = Some((q.mean - coarse.mean).abs());
        }
    } else {
        est.flags.push("nonvanishing not certified on this grid: estimate only".into());
    }
    if q.excluded > 0 {
        est.flags.push(format!("integrable singularity: {} grid points with |f^| < 1e-12 excluded", q.excluded));
    }
    Ok(est)
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub det: String,
    pub det_star: String,
    pub mahler_det: f64,
    pub mahler_det_star: f64,
    pub difference: f64,
    pub grid: usize,
}

/// Compares the entropies of `X_A` and `X_{A*}`: `m(det A)` against
/// `m(det A*)`, with `det A*` computed independently from `A*`.
pub fn duality_check(a: &GroupRingMatrix, m: usize, exec: Exec) -> Result<DualityReport> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch("duality check needs a square matrix".into()));
    }
    let det = a.determinant()?;
    let det_star = a.involution().determinant()?;
    let md = mahler_measure(&det, m, exec)?.value;
    let ms = mahler_measure(&det_star, m, exec)?.value;
    Ok(DualityReport {
        det: det.to_string(),
        det_star: det_star.to_string(),
        mahler_det: md,
        mahler_det_star: ms,
        difference: (md - ms).abs(),
        grid: m,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AdditivityReport {
    pub f: String,
    pub g: String,
    pub m_f: f64,
    pub m_g: f64,
    pub m_fg: f64,
    pub discrepancy: f64,
    pub grid: usize,
}

/// `|m(fg) - m(f) - m(g)|` for certified-invertible `f`, `g`.
pub fn additivity_check(f: &GroupRingElement, g: &GroupRingElement, m: usize, exec: Exec) -> Result<AdditivityReport> {
    for h in [f, g] {
        match certify_invertible_default(h, exec)?.verdict {
            Verdict::Invertible => {}
            Verdict::NotInvertible => return Err(Error::NotInvertible(h.to_string())),
            Verdict::Unknown => return Err(Error::NotCertified),
        }
    }
    let fg = f.checked_mul(g)?;
    let m_f = mahler_measure(f, m, exec)?.value;
    let m_g = mahler_measure(g, m, exec)?.value;
    let m_fg = mahler_measure(&fg, m, exec)?.value;
    Ok(AdditivityReport { f: f.to_string(), g: g.to_string(), m_f, m_g, m_fg, discrepancy: (m_fg - m_f - m_g).abs(), grid: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupring::matrix_from_strs;

    fn p(s: &str) -> GroupRingElement {
        s.parse().unwrap()
    }

    #[test]
    fn jensen_values() {
        let e = Exec::default();
        let a = mahler_measure(&p("u1 - 2"), 4096, e).unwrap();
        assert!((a.value - 2f64.ln()).abs() < 1e-12);
        assert!(a.error_estimate.unwrap() < 1e-10);
        let b = mahler_measure(&p("3 - u1 - u1^-1"), 4096, e).unwrap();
        assert!((b.value - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-12);
        assert_eq!(mahler_measure(&p("1"), 64, e).unwrap().value, 0.0);
        assert!(mahler_measure(&GroupRingElement::zero(1), 64, e).is_err());
    }

    #[test]
    fn two_variable_measure_matches_known_value() {
        // m(1 + u1 + u2) = (3 sqrt 3 / (4 pi)) L(2, chi_{-3}) = 0.3230659472...
        let est = mahler_measure(&p("1 + u1 + u2"), 512, Exec::default()).unwrap();
        assert!((est.value - 0.3230659472194505).abs() < 5e-3);
        assert!(!est.flags.is_empty());
    }

    #[test]
    fn duality_examples() {
        for rows in [vec![vec!["u1 - 2"]], vec![vec!["3 - u1 - u1^-1"]], vec![vec!["2", "u1"], vec!["u1^-1", "2"]]] {
            let r: Vec<&[&str]> = rows.iter().map(|r| r.as_slice()).collect();
            let a = matrix_from_strs(&r).unwrap();
            let rep = duality_check(&a, 1024, Exec::default()).unwrap();
            assert!(rep.difference <= 1e-12);
        }
        let a = matrix_from_strs(&[&["2", "u1"], &["u1^-1", "2"]]).unwrap();
        let rep = duality_check(&a, 1024, Exec::default()).unwrap();
        assert_eq!(rep.det, "3");
        assert!((rep.mahler_det - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn additivity_examples() {
        let e = Exec::default();
        let r = additivity_check(&p("u1 - 2"), &p("u1 - 2"), 1024, e).unwrap();
        assert!((r.m_fg - 2.0 * 2f64.ln()).abs() < 1e-10);
        let r = additivity_check(&p("u1 - 2"), &p("1"), 1024, e).unwrap();
        assert!((r.m_fg - 2f64.ln()).abs() < 1e-10);
        let r = additivity_check(&p("u1 - 2"), &p("3 - u1 - u1^-1"), 1024, e).unwrap();
        assert!((r.m_fg - 1.655571).abs() < 1e-6);
        assert!(r.discrepancy < 1e-10);
        assert!(additivity_check(&p("u1 - 1"), &p("1"), 1024, e).is_err());
    }
}
